#include "fetx/param_ranges.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fetx/errors.hpp"

namespace fetx {

ParamRanges ParamRanges::defaults() {
    using enum SamplingLaw;
    return {{{
        {4.30, 4.60, Uniform},     // PHIG
        {0.05, 0.15, Uniform},     // ETA0
        {0.00, 0.30, Uniform},     // CIT
        {0.00, 0.20, Uniform},     // CDSC
        {0.5, 1.5, Uniform},       // U0
        {0.3, 1.5, Uniform},       // UA
        {0.2, 0.6, Uniform},       // VSATV
        {0.0, 0.3, Uniform},       // LAMBDA
        {0.0, 2000.0, Uniform},    // RDSW
        {1e-10, 1e-8, LogUniform}, // IOFF0
        {0.6, 1.5, Uniform},       // CGGMAX
        {0.05, 0.45, Uniform},     // CGGMIN
        {-0.10, 0.10, Uniform},    // DVTCV
        {0.05, 0.15, Uniform},     // ACV
    }}};
}

void ParamRanges::validate() const {
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const auto& r = bounds[i];
        const std::string name(kParamNames[i]);
        if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) throw ConfigError("range for " + name + " is not finite");
        if (r.lo > r.hi) throw ConfigError("range for " + name + " has lo > hi");
        if (r.law == SamplingLaw::LogUniform && !(r.lo > 0.0)) {
            throw ConfigError("log-uniform range for " + name + " must be positive");
        }
    }
}

ModelParams ParamRanges::clip(const ModelParams& p, std::vector<std::string>* clipped) const {
    auto v = p.values();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const double c = std::clamp(v[i], bounds[i].lo, bounds[i].hi);
        if (c != v[i] && clipped) clipped->emplace_back(kParamNames[i]);
        v[i] = c;
    }
    return ModelParams::from_values(v);
}

bool ParamRanges::contains(const ModelParams& p) const {
    const auto v = p.values();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (!(v[i] >= bounds[i].lo && v[i] <= bounds[i].hi)) return false;
    }
    return true;
}

std::array<double, kNumParams> ParamRanges::to_unit(const ModelParams& p) const {
    const auto v = p.values();
    std::array<double, kNumParams> u{};
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const auto& r = bounds[i];
        if (r.hi == r.lo) continue;
        if (r.law == SamplingLaw::LogUniform) {
            u[i] = (std::log10(v[i]) - std::log10(r.lo)) / (std::log10(r.hi) - std::log10(r.lo));
        } else {
            u[i] = (v[i] - r.lo) / (r.hi - r.lo);
        }
    }
    return u;
}

ModelParams ParamRanges::from_unit(std::span<const double> u) const {
    if (u.size() != kNumParams) throw DataError("expected 14 unit values");
    std::array<double, kNumParams> v{};
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const auto& r = bounds[i];
        if (r.law == SamplingLaw::LogUniform) {
            const double a = std::log10(r.lo);
            v[i] = std::pow(10.0, a + u[i] * (std::log10(r.hi) - a));
        } else {
            v[i] = r.lo + u[i] * (r.hi - r.lo);
        }
    }
    return ModelParams::from_values(v);
}

}  // namespace fetx
