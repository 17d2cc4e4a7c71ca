#include "fetx/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fetx/errors.hpp"

namespace fetx {

namespace {

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// vds / (1 + (vds/vdsat)^A)^(1/A), evaluated without overflowing the power.
double effective_vds(double vds, double vdsat) {
    if (vds <= 0.0 || vdsat <= 0.0) return 0.0;
    const double r = vds / vdsat;
    if (r <= 1.0) return vds / std::pow(1.0 + std::pow(r, kSmoothingExponent), 1.0 / kSmoothingExponent);
    return vdsat / std::pow(1.0 + std::pow(1.0 / r, kSmoothingExponent), 1.0 / kSmoothingExponent);
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidParameter(std::string("non-finite ") + what);
}

}  // namespace

std::string_view to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::IdsVgs: return "IdsVgs";
        case CurveKind::CggVgs: return "CggVgs";
        case CurveKind::IdsVds: return "IdsVds";
        case CurveKind::GmVgs: return "GmVgs";
        case CurveKind::Gm2Vgs: return "Gm2Vgs";
    }
    return "?";
}

CurveKind curve_kind_from_string(std::string_view s) {
    for (auto k : {CurveKind::IdsVgs, CurveKind::CggVgs, CurveKind::IdsVds, CurveKind::GmVgs, CurveKind::Gm2Vgs}) {
        if (to_string(k) == s) return k;
    }
    throw DataError("unknown curve kind '" + std::string(s) + "'");
}

std::size_t BiasGrid::size() const {
    if (!(step > 0.0) || stop < start) throw DataError("invalid bias grid");
    return static_cast<std::size_t>(std::llround((stop - start) / step)) + 1;
}

std::vector<double> BiasGrid::points() const {
    const std::size_t n = size();
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = at(k);
    return x;
}

BiasGrid default_iv_grid(double vds) { return {0.0, kIvStop, kGridStep, vds}; }
BiasGrid default_cv_grid() { return {0.0, kCvStop, kGridStep, 0.0}; }
BiasGrid default_output_grid(double vgs) { return {0.0, kIvStop, kGridStep, vgs}; }

void validate_curve(const Curve& c) {
    if (c.x.size() != c.y.size()) throw DataError("curve x/y length mismatch");
    if (c.x.size() < 2) throw DataError("curve needs at least 2 points");
    const double h = c.x[1] - c.x[0];
    if (!(h > 0.0)) throw DataError("curve x must be strictly increasing");
    const double tol = 1e-6 * h;
    for (std::size_t k = 0; k < c.x.size(); ++k) {
        if (!std::isfinite(c.x[k]) || !std::isfinite(c.y[k])) throw DataError("non-finite curve sample");
        if (k > 0 && !(c.x[k] > c.x[k - 1])) throw DataError("curve x must be strictly increasing");
        if (std::abs(c.x[k] - (c.x[0] + static_cast<double>(k) * h)) > tol) throw DataError("curve grid is not uniform");
    }
    const bool positive = c.kind == CurveKind::IdsVgs || c.kind == CurveKind::IdsVds || c.kind == CurveKind::CggVgs;
    if (positive && std::any_of(c.y.begin(), c.y.end(), [](double v) { return !(v > 0.0); })) {
        throw DataError(std::string(to_string(c.kind)) + " values must be strictly positive");
    }
}

Curve make_curve(CurveKind kind, double bias, std::vector<double> x, std::vector<double> y) {
    Curve c{kind, {}, std::move(x), std::move(y)};
    if (c.x.size() < 2) throw DataError("curve needs at least 2 points");
    c.grid.start = c.x.front();
    c.grid.stop = c.x.back();
    c.grid.step = (c.x.back() - c.x.front()) / static_cast<double>(c.x.size() - 1);
    c.grid.bias = bias;
    validate_curve(c);
    return c;
}

Curve CurveSet::gm_low() const { return differentiate(ids_low, 1); }
Curve CurveSet::gm_high() const { return differentiate(ids_high, 1); }

void check_params(const ModelParams& p) {
    const auto v = p.values();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (!std::isfinite(v[i])) throw InvalidParameter("non-finite parameter " + std::string(kParamNames[i]));
    }
    if (!(p.ioff0 > 0.0)) throw InvalidParameter("IOFF0 must be positive");
    if (!(p.acv > 0.0)) throw InvalidParameter("ACV must be positive");
    if (!(p.vsatv > 0.0)) throw InvalidParameter("VSATV must be positive");
}

double ids(const ModelParams& p, double vgs, double vds) {
    check_params(p);
    check_finite(vgs, "vgs");
    check_finite(vds, "vds");
    if (vds < 0.0) throw InvalidParameter("vds must be non-negative");

    const double vt = kThermalVoltage;
    const double n = 1.0 + p.cit + p.cdsc * (1.0 + vds);
    const double vth = (p.phig - kWorkFunctionRef) - p.eta0 * vds;
    const double q = n * vt * softplus((vgs - vth) / (n * vt));
    const double vdsat = p.vsatv * q / (p.vsatv + q);
    const double vdse = effective_vds(vds, vdsat);
    const double mu = p.u0 / (1.0 + p.ua * q);
    const double icore = kCurrentPrefactor * mu * q * vdse * (1.0 + p.lambda * vds);
    return icore / (1.0 + p.rdsw * icore) + p.ioff0;
}

double cgg(const ModelParams& p, double vgs) {
    check_params(p);
    check_finite(vgs, "vgs");
    const double vth_cv = (p.phig - kWorkFunctionRef) + p.dvtcv;
    return p.cggmin + (p.cggmax - p.cggmin) * logistic((vgs - vth_cv) / p.acv);
}

namespace {

void fill_values(const ModelParams& p, Curve& c) {
    const auto& grid = c.grid;
    c.y.resize(c.x.size());
    switch (c.kind) {
        case CurveKind::IdsVgs:
            for (std::size_t k = 0; k < c.x.size(); ++k) c.y[k] = ids(p, c.x[k], grid.bias);
            break;
        case CurveKind::CggVgs:
            for (std::size_t k = 0; k < c.x.size(); ++k) c.y[k] = cgg(p, c.x[k]);
            break;
        case CurveKind::IdsVds:
            for (std::size_t k = 0; k < c.x.size(); ++k) c.y[k] = ids(p, grid.bias, c.x[k]);
            break;
        default:
            throw DataError("derived curve kinds cannot be simulated directly");
    }
}

}  // namespace

Curve simulate_curve(const ModelParams& p, CurveKind kind, const BiasGrid& grid) {
    Curve c{kind, grid, grid.points(), {}};
    fill_values(p, c);
    return c;
}

Curve simulate_like(const ModelParams& p, const Curve& target) {
    Curve c{target.kind, target.grid, target.x, {}};
    fill_values(p, c);
    return c;
}

CurveSet simulate_curveset(const ModelParams& p) {
    return {simulate_curve(p, CurveKind::IdsVgs, default_iv_grid(kVdsLow)),
            simulate_curve(p, CurveKind::IdsVgs, default_iv_grid(kVdsHigh)),
            simulate_curve(p, CurveKind::CggVgs, default_cv_grid())};
}

std::vector<Curve> simulate_ids_vds(const ModelParams& p, const std::vector<double>& vgs_list) {
    std::vector<Curve> out;
    out.reserve(vgs_list.size());
    for (double vgs : vgs_list) out.push_back(simulate_curve(p, CurveKind::IdsVds, default_output_grid(vgs)));
    return out;
}

Curve differentiate(const Curve& curve, int order) {
    if (curve.kind != CurveKind::IdsVgs) throw DataError("differentiate: expected an IdsVgs curve");
    if (order != 1 && order != 2) throw DataError("differentiate: order must be 1 or 2");
    const std::size_t n = curve.y.size();
    if (n < 3 || curve.x.size() != n) throw DataError("differentiate: need at least 3 points");

    const auto& y = curve.y;
    const double h = curve.x[1] - curve.x[0];
    Curve out{order == 1 ? CurveKind::GmVgs : CurveKind::Gm2Vgs, curve.grid, curve.x, std::vector<double>(n)};
    auto& d = out.y;

    if (order == 1) {
        d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
        d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    } else {
        const double h2 = h * h;
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2;
        if (n >= 4) {
            d[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / h2;
            d[n - 1] = (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / h2;
        } else {
            // three points only: the single interior stencil is all we have
            d[0] = d[1];
            d[2] = d[1];
        }
    }
    return out;
}

ModelParams apply_knobs(const ModelParams& p, const ProcessKnobs& knobs, const ParamRanges& ranges,
                        std::vector<std::string>* clipped) {
    const double sl = knobs.lg_scale;
    const double se = knobs.eot_scale;
    ModelParams out = p;
    out.cggmax = p.cggmax * sl / se;
    out.cit = p.cit * se;
    out.cdsc = p.cdsc * se;
    out.eta0 = p.eta0 * se / (sl * sl);
    out.lambda = p.lambda / sl;
    out.u0 = p.u0 / sl;
    out.phig = p.phig - 0.05 * (1.0 / sl - 1.0);
    return ranges.clip(out, clipped);
}

}  // namespace fetx
