#pragma once

#include <array>
#include <string>
#include <vector>

#include "fetx/model_params.hpp"

namespace fetx {

enum class SamplingLaw { Uniform, LogUniform };

struct ParamRange {
    double lo = 0.0;
    double hi = 1.0;
    SamplingLaw law = SamplingLaw::Uniform;

    bool operator==(const ParamRange&) const = default;
};

/// Per-parameter sampling bounds for the Monte Carlo corpus. The same bounds
/// clip network predictions and define the [0, 1] target mapping.
struct ParamRanges {
    std::array<ParamRange, kNumParams> bounds;

    static ParamRanges defaults();

    /// Throws ConfigError unless lo <= hi everywhere and log-uniform bounds are positive.
    void validate() const;

    /// Clamps each parameter into [lo, hi]; names of clamped fields go to `clipped`.
    ModelParams clip(const ModelParams& p, std::vector<std::string>* clipped = nullptr) const;

    bool contains(const ModelParams& p) const;

    /// Min-max map into [0, 1]; log-uniform parameters are mapped in log10.
    std::array<double, kNumParams> to_unit(const ModelParams& p) const;
    ModelParams from_unit(std::span<const double> u) const;

    bool operator==(const ParamRanges&) const = default;
};

/// Minimum separation CGGMAX - CGGMIN, fF.
inline constexpr double kCggMargin = 0.1;

}  // namespace fetx
