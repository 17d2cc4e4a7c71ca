#include "fetx/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fetx/errors.hpp"

namespace fetx {

namespace {

constexpr double kGridTol = 1e-9;

std::string tagged(std::string_view base, std::string_view suffix) {
    return std::string(base) + std::string(suffix);
}

void require_endpoints(const Curve& c, double start, double stop, std::string_view what) {
    if (c.x.empty() || std::abs(c.x.front() - start) > kGridTol || std::abs(c.x.back() - stop) > kGridTol) {
        throw DataError(std::string(what) + ": curve must span the default grid [" + std::to_string(start) + ", " +
                        std::to_string(stop) + "] V");
    }
}

}  // namespace

void FeatureConfig::validate() const {
    if (!(ss_lo > 0.0 && ss_lo < ss_hi && ss_hi < 10.0 * i_crit)) {
        throw ConfigError("feature config requires 0 < ss_lo < ss_hi < 10*i_crit");
    }
}

double trapz(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("trapz: x/y length mismatch");
    if (x.size() < 2) throw DataError("trapz: need at least 2 points");
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return sum;
}

double trapz(const Curve& c) { return trapz(c.x, c.y); }

double rms(std::span<const double> y) {
    if (y.empty()) throw DataError("rms: empty curve");
    double ss = 0.0;
    for (double v : y) ss += v * v;
    return std::sqrt(ss / static_cast<double>(y.size()));
}

double rms(const Curve& c) { return rms(c.y); }

double vth_constant_current(const Curve& c, double i_crit, std::string_view feature) {
    const std::string name(feature);
    if (c.kind != CurveKind::IdsVgs) throw ExtractionError(name, "expected an IdsVgs curve");
    if (c.y.size() < 2 || c.x.size() != c.y.size()) throw ExtractionError(name, "need at least 2 points");
    if (std::any_of(c.y.begin(), c.y.end(), [](double v) { return !(v > 0.0); })) {
        throw ExtractionError(name, "Ids must be strictly positive");
    }
    if (c.y.front() >= i_crit) throw ExtractionError(name, "Ids starts above the threshold current");

    const double target = std::log10(i_crit);
    for (std::size_t k = 0; k + 1 < c.y.size(); ++k) {
        if (c.y[k] < i_crit && c.y[k + 1] >= i_crit) {
            const double l0 = std::log10(c.y[k]);
            const double l1 = std::log10(c.y[k + 1]);
            return c.x[k] + (target - l0) / (l1 - l0) * (c.x[k + 1] - c.x[k]);
        }
    }
    throw ExtractionError(name, "Ids never reaches the threshold current");
}

double subthreshold_swing(const Curve& c, const FeatureConfig& cfg, std::string_view feature) {
    const std::string name(feature);
    if (c.kind != CurveKind::IdsVgs) throw ExtractionError(name, "expected an IdsVgs curve");

    // least squares of Vgs on log10(Ids) over the window samples
    double sl = 0.0, sv = 0.0;
    std::size_t m = 0;
    for (std::size_t k = 0; k < c.y.size(); ++k) {
        if (c.y[k] >= cfg.ss_lo && c.y[k] <= cfg.ss_hi) {
            sl += std::log10(c.y[k]);
            sv += c.x[k];
            ++m;
        }
    }
    if (m < 3) throw ExtractionError(name, "fewer than 3 samples in the subthreshold window");
    const double lbar = sl / static_cast<double>(m);
    const double vbar = sv / static_cast<double>(m);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < c.y.size(); ++k) {
        if (c.y[k] >= cfg.ss_lo && c.y[k] <= cfg.ss_hi) {
            const double dl = std::log10(c.y[k]) - lbar;
            sxy += dl * (c.x[k] - vbar);
            sxx += dl * dl;
        }
    }
    if (!(sxx > 0.0)) throw ExtractionError(name, "Ids is flat inside the subthreshold window");
    const double ss = 1000.0 * sxy / sxx;
    if (!(ss > 0.0) || !std::isfinite(ss)) throw ExtractionError(name, "non-positive subthreshold swing");
    return ss;
}

std::array<double, 6> extract_iv_features(const Curve& c, const FeatureConfig& cfg, std::string_view suffix) {
    require_endpoints(c, 0.0, kIvStop, tagged("Ids-Vgs", suffix));
    return {vth_constant_current(c, cfg.i_crit, tagged("Vth", suffix)),
            subthreshold_swing(c, cfg, tagged("SS", suffix)),
            c.y.back(),
            c.y.front(),
            trapz(c),
            rms(c)};
}

std::array<double, 6> extract_cv_features(const Curve& c) {
    if (c.kind != CurveKind::CggVgs) throw ExtractionError("Cgg", "expected a CggVgs curve");
    if (c.y.size() < 3 || c.x.size() != c.y.size()) throw ExtractionError("Cgg", "need at least 3 points");
    if (std::abs(c.x.front()) > kGridTol) throw DataError("Cgg-Vgs: curve must start at Vgs = 0");

    const auto [mn, mx] = std::minmax_element(c.y.begin(), c.y.end());
    const double cmax = *mx;
    const double cmin = *mn;
    const double mid = 0.5 * (cmax + cmin);

    double v_mid = 0.0;
    bool found = false;
    if (cmax > cmin) {
        for (std::size_t k = 0; k + 1 < c.y.size(); ++k) {
            if (c.y[k] < mid && c.y[k + 1] >= mid) {
                v_mid = c.x[k] + (mid - c.y[k]) / (c.y[k + 1] - c.y[k]) * (c.x[k + 1] - c.x[k]);
                found = true;
                break;
            }
        }
    }
    if (!found) throw ExtractionError("V_mid", "Cgg never crosses its midpoint");

    const double h = c.x[1] - c.x[0];
    const double slope = (-3.0 * c.y[0] + 4.0 * c.y[1] - c.y[2]) / (2.0 * h);
    return {cmax, cmin, v_mid, trapz(c), rms(c), slope};
}

std::array<double, 3> extract_gm_features(const Curve& c) {
    if (c.kind != CurveKind::GmVgs) throw ExtractionError("Gm", "expected a GmVgs curve");
    if (c.y.empty()) throw ExtractionError("Gm", "empty curve");
    return {*std::max_element(c.y.begin(), c.y.end()), trapz(c), rms(c)};
}

FeatureVector featurize(const CurveSet& cs, const FeatureConfig& cfg) {
    FeatureVector fv;
    auto put = [&fv](std::size_t offset, const auto& block) {
        std::copy(block.begin(), block.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(offset));
    };
    put(0, extract_cv_features(cs.cgg_low));
    put(6, extract_iv_features(cs.ids_low, cfg, "1"));
    put(12, extract_iv_features(cs.ids_high, cfg, "2"));
    put(18, extract_gm_features(cs.gm_low()));
    put(21, extract_gm_features(cs.gm_high()));
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
        if (!std::isfinite(fv[i])) throw ExtractionError(std::string(kFeatureNames[i]), "non-finite value");
    }
    return fv;
}

}  // namespace fetx
