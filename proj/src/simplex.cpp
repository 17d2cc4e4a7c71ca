#include "fetx/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fetx {

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                          const SimplexOptions& opt) {
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    const std::size_t dim = x0.size();
    SimplexResult res;
    res.x = x0;
    res.value = std::numeric_limits<double>::infinity();

    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        ++res.evaluations;
        if (v < res.value) {
            res.value = v;
            res.x = x;
        }
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    if (opt.max_evaluations == 0) return res;
    eval(x0);
    if (dim == 0 || res.value == 0.0) {
        res.trace.push_back(res.value);
        return res;
    }

    std::vector<std::vector<double>> pts;
    std::vector<double> vals;
    double step = opt.initial_step;

    auto build = [&](const std::vector<double>& base, double base_val) {
        pts.assign(1, base);
        vals.assign(1, base_val);
        for (std::size_t i = 0; i < dim && res.evaluations < opt.max_evaluations; ++i) {
            auto p = base;
            p[i] += step;
            pts.push_back(p);
            vals.push_back(eval(p));
        }
    };
    build(x0, res.value);

    std::vector<std::size_t> idx(dim + 1);
    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
    while (res.evaluations < opt.max_evaluations && pts.size() == dim + 1) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const std::size_t best = idx.front(), worst = idx.back(), second = idx[dim - 1];

        double size = 0.0;
        for (std::size_t j = 0; j < dim + 1; ++j) {
            for (std::size_t i = 0; i < dim; ++i) size = std::max(size, std::abs(pts[j][i] - pts[best][i]));
        }
        if (size < opt.restart_tolerance) {
            step *= 0.5;
            if (step < opt.restart_tolerance) break;
            build(res.x, res.value);
            res.trace.push_back(res.value);
            continue;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t j : idx) {
            if (j == worst) continue;
            for (std::size_t i = 0; i < dim; ++i) centroid[i] += pts[j][i] / static_cast<double>(dim);
        }
        for (std::size_t i = 0; i < dim; ++i) xr[i] = centroid[i] + kReflect * (centroid[i] - pts[worst][i]);
        const double fr = eval(xr);

        if (fr < vals[best]) {
            for (std::size_t i = 0; i < dim; ++i) xe[i] = centroid[i] + kExpand * (xr[i] - centroid[i]);
            const double fe = res.evaluations < opt.max_evaluations ? eval(xe) : std::numeric_limits<double>::infinity();
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            for (std::size_t i = 0; i < dim; ++i) {
                xc[i] = outside ? centroid[i] + kContract * (xr[i] - centroid[i])
                                : centroid[i] + kContract * (pts[worst][i] - centroid[i]);
            }
            const double fc = res.evaluations < opt.max_evaluations ? eval(xc) : std::numeric_limits<double>::infinity();
            if (fc < std::min(fr, vals[worst])) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                for (std::size_t j = 0; j < dim + 1 && res.evaluations < opt.max_evaluations; ++j) {
                    if (j == best) continue;
                    for (std::size_t i = 0; i < dim; ++i) pts[j][i] = pts[best][i] + kShrink * (pts[j][i] - pts[best][i]);
                    vals[j] = eval(pts[j]);
                }
            }
        }
        res.trace.push_back(res.value);
        if (res.value == 0.0) break;
    }
    if (res.trace.empty() || res.trace.back() != res.value) res.trace.push_back(res.value);
    return res;
}

}  // namespace fetx
