#pragma once

#include <cmath>
#include <vector>

#include "fetx/dataset.hpp"
#include "fetx/device_model.hpp"
#include "fetx/rng.hpp"

namespace testutil {

inline bool rel_close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

/// Ids = i0 * 10^((Vgs - v0) / (ss_mv / 1000)) on the default I-V grid.
inline fetx::Curve exp_curve(double i0, double v0, double ss_mv, double vds = fetx::kVdsLow) {
    const fetx::BiasGrid g = fetx::default_iv_grid(vds);
    fetx::Curve c{fetx::CurveKind::IdsVgs, g, g.points(), {}};
    for (double v : c.x) c.y.push_back(i0 * std::pow(10.0, (v - v0) / (ss_mv / 1000.0)));
    return c;
}

template <class F>
fetx::Curve sampled(fetx::CurveKind kind, const fetx::BiasGrid& g, F f) {
    fetx::Curve c{kind, g, g.points(), {}};
    for (double v : c.x) c.y.push_back(f(v));
    return c;
}

/// A few in-range parameter sets, deterministic.
inline std::vector<fetx::ModelParams> sample_set(std::size_t n, std::uint64_t seed = 11) {
    fetx::Rng rng(seed);
    std::vector<fetx::ModelParams> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(fetx::sample_params(fetx::ParamRanges::defaults(), rng));
    return out;
}

}  // namespace testutil
