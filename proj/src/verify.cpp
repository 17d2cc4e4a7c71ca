#include "fetx/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "fetx/errors.hpp"
#include "fetx/features.hpp"
#include "fetx/simplex.hpp"

namespace fetx {

namespace {

using Clock = std::chrono::steady_clock;

void require_same_grid(const Curve& a, const Curve& b) {
    if (a.x.size() != b.x.size() || a.y.size() != b.y.size() || a.x.size() != a.y.size() || a.x.empty()) {
        throw DataError("curve grids differ in length");
    }
    const double h = a.x.size() > 1 ? std::abs(a.x[1] - a.x[0]) : 1.0;
    for (std::size_t k = 0; k < a.x.size(); ++k) {
        if (std::abs(a.x[k] - b.x[k]) > 1e-9 * h) throw DataError("curve grids differ");
    }
}

double relative_rms(std::span<const double> pred, std::span<const double> target) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
        const double d = pred[k] - target[k];
        num += d * d;
        den += target[k] * target[k];
    }
    if (!(den > 0.0)) throw DataError("target curve is identically zero");
    return 100.0 * std::sqrt(num) / std::sqrt(den);
}

void require_present(const Curve& c, const char* name) {
    if (c.x.empty() || c.y.empty()) throw DataError(std::string("target curve set is missing ") + name);
}

}  // namespace

double rms_percent(const Curve& pred, const Curve& target) {
    require_same_grid(pred, target);
    return relative_rms(pred.y, target.y);
}

double subthreshold_rms_percent(const Curve& pred, const Curve& target, double i_crit) {
    require_same_grid(pred, target);
    std::vector<double> lp, lt;
    for (std::size_t k = 0; k < target.y.size(); ++k) {
        if (target.y[k] < i_crit) {
            if (!(pred.y[k] > 0.0) || !(target.y[k] > 0.0)) throw DataError("subthreshold currents must be positive");
            lp.push_back(std::log10(pred.y[k]));
            lt.push_back(std::log10(target.y[k]));
        }
    }
    if (lt.size() < 3) throw DataError("fewer than 3 subthreshold samples");
    return relative_rms(lp, lt);
}

VerifyReport compare_curves(const CurveSet& target, const ModelParams& predicted, double i_crit,
                            const std::optional<ModelParams>& truth, const ParamRanges& ranges) {
    require_present(target.cgg_low, "Cgg-Vgs");
    require_present(target.ids_low, "low-Vds Ids-Vgs");
    require_present(target.ids_high, "high-Vds Ids-Vgs");

    VerifyReport rep;
    rep.predicted = predicted;
    rep.truth = truth;

    const Curve cgg = simulate_like(predicted, target.cgg_low);
    const Curve il = simulate_like(predicted, target.ids_low);
    const Curve ih = simulate_like(predicted, target.ids_high);

    auto iv = [&](std::size_t slot, const Curve& pred, const Curve& tgt) {
        return CurveError{std::string(kReportedCurves[slot]), CurveKind::IdsVgs, tgt.grid.bias, rms_percent(pred, tgt),
                          subthreshold_rms_percent(pred, tgt, i_crit)};
    };
    auto gm = [&](std::size_t slot, const Curve& pred, const Curve& tgt) {
        return CurveError{std::string(kReportedCurves[slot]), CurveKind::GmVgs, tgt.grid.bias,
                          rms_percent(differentiate(pred, 1), differentiate(tgt, 1)), std::nullopt};
    };

    rep.curves.push_back({std::string(kReportedCurves[0]), CurveKind::CggVgs, target.cgg_low.grid.bias,
                          rms_percent(cgg, target.cgg_low), std::nullopt});
    rep.curves.push_back(iv(1, il, target.ids_low));
    rep.curves.push_back(iv(2, ih, target.ids_high));
    rep.curves.push_back(gm(3, il, target.ids_low));
    rep.curves.push_back(gm(4, ih, target.ids_high));

    if (truth) {
        std::array<double, kNumParams> err{};
        const auto pv = predicted.values();
        const auto tv = truth->values();
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const auto& b = ranges.bounds[i];
            double span = b.hi - b.lo;
            double d = std::abs(pv[i] - tv[i]);
            if (b.law == SamplingLaw::LogUniform) {
                span = std::log10(b.hi) - std::log10(b.lo);
                d = std::abs(std::log10(pv[i]) - std::log10(tv[i]));
            }
            err[i] = span > 0.0 ? d / span : d;
        }
        rep.param_errors = err;
    }
    return rep;
}

VerifyReport round_trip(const CurveSet& target, const ExtractorModel& model, const std::optional<ModelParams>& truth) {
    require_present(target.cgg_low, "Cgg-Vgs");
    require_present(target.ids_low, "low-Vds Ids-Vgs");
    require_present(target.ids_high, "high-Vds Ids-Vgs");
    const auto t0 = Clock::now();
    const ModelParams predicted = predict_params(model, featurize(target, model.features));
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    auto rep = compare_curves(target, predicted, model.features.i_crit, truth, model.normalizer.ranges);
    rep.extraction_seconds = secs;
    return rep;
}

double median(std::vector<double> v) {
    if (v.empty()) throw DataError("median of an empty set");
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

ErrorSummary summarize(const std::vector<VerifyReport>& reports) {
    if (reports.empty()) throw DataError("no reports to summarize");
    ErrorSummary s;
    s.count = reports.size();
    for (std::size_t c = 0; c < kNumReportedCurves; ++c) {
        std::vector<double> v;
        for (const auto& r : reports) v.push_back(r.curves.at(c).rms_percent);
        s.median_rms[c] = median(std::move(v));
    }
    for (std::size_t c = 0; c < 2; ++c) {
        std::vector<double> v;
        for (const auto& r : reports) v.push_back(r.curves.at(c + 1).subthreshold_rms_percent.value_or(0.0));
        s.median_subthreshold[c] = median(std::move(v));
    }
    return s;
}

std::array<ProcessKnobs, 5> variability_knobs() {
    return {{{1.0, 1.0}, {0.9, 1.0}, {1.1, 1.0}, {1.0, 0.9}, {1.0, 1.1}}};
}

VariabilityResult variability_suite(const ModelParams& base, const ExtractorModel& model) {
    VariabilityResult out;
    for (const auto& k : variability_knobs()) {
        const ModelParams p = apply_knobs(base, k, model.normalizer.ranges);
        auto rep = round_trip(simulate_curveset(p), model, p);
        rep.knobs = k;
        rep.label = (k == ProcessKnobs{}) ? std::string("baseline")
                                          : "LG x" + std::to_string(k.lg_scale).substr(0, 4) + ", EOT x" +
                                                std::to_string(k.eot_scale).substr(0, 4);
        out.reports.push_back(std::move(rep));
    }
    for (std::size_t c = 0; c < kNumReportedCurves; ++c) {
        double s = 0.0;
        for (const auto& r : out.reports) s += r.curves[c].rms_percent;
        out.average_rms[c] = s / static_cast<double>(out.reports.size());
    }
    return out;
}

double fit_objective(const CurveSet& target, const ModelParams& p) {
    return rms_percent(simulate_like(p, target.cgg_low), target.cgg_low) +
           rms_percent(simulate_like(p, target.ids_low), target.ids_low) +
           rms_percent(simulate_like(p, target.ids_high), target.ids_high);
}

DirectFitResult direct_fit(const CurveSet& target, const ParamRanges& ranges, const ModelParams& init,
                           std::size_t max_evaluations) {
    const auto t0 = Clock::now();
    auto to_params = [&](std::span<const double> u) {
        std::array<double, kNumParams> c{};
        for (std::size_t i = 0; i < kNumParams; ++i) c[i] = std::clamp(u[i], 0.0, 1.0);
        ModelParams p = ranges.clip(ranges.from_unit(c));
        if (p.cggmin + kCggMargin > p.cggmax) p.cggmin = std::max(p.cggmax - kCggMargin, ranges.bounds[11].lo);
        return p;
    };

    const ModelParams start = ranges.clip(init);
    const double start_obj = fit_objective(target, start);
    DirectFitResult res{start, start_obj, 1, 0.0, {start_obj}};

    if (start_obj > 0.0 && max_evaluations > 1) {
        const auto u0 = ranges.to_unit(start);
        SimplexOptions opt;
        opt.max_evaluations = max_evaluations - 1;
        opt.initial_step = 0.1;
        const auto nm = nelder_mead([&](std::span<const double> u) { return fit_objective(target, to_params(u)); },
                                    std::vector<double>(u0.begin(), u0.end()), opt);
        res.evaluations += nm.evaluations;
        for (double v : nm.trace) res.trace.push_back(std::min(v, start_obj));
        if (nm.value < start_obj) {
            res.params = to_params(nm.x);
            res.objective = nm.value;
        }
    }
    res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return res;
}

}  // namespace fetx
