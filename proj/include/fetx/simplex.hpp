#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fetx {

struct SimplexOptions {
    std::size_t max_evaluations = 2000;
    double initial_step = 0.1;
    /// Restart around the incumbent once the simplex collapses below this size.
    double restart_tolerance = 1e-7;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    /// Best value after each iteration; non-increasing.
    std::vector<double> trace;
};

/// Nelder-Mead downhill simplex. `f(x0)` is the first evaluation, so the
/// result is never worse than the start point.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                          const SimplexOptions& opt = {});

}  // namespace fetx
