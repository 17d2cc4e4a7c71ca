#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "fetx/device_model.hpp"

namespace fetx {

inline constexpr std::size_t kNumFeatures = 24;

/// Column order of FeatureVector. Units: Cgg_* fF, V_mid V, Cgg_inte fF*V,
/// Cgg_slope fF/V, Vth V, SS mV/dec, Ion/Ioff A, Ids_inte A*V, Gm_max A/V,
/// Gm_inte A, rms values in the unit of the curve.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "Cgg_max", "Cgg_min",   "V_mid",    "Cgg_inte",  "Cgg_rms",  "Cgg_slope", "Vth1",     "SS1",
    "Ion1",    "Ioff1",     "Ids_inte1", "Ids_rms1", "Vth2",     "SS2",       "Ion2",     "Ioff2",
    "Ids_inte2", "Ids_rms2", "Gm_max1", "Gm_inte1",  "Gm_rms1",  "Gm_max2",   "Gm_inte2", "Gm_rms2"};

struct FeatureVector {
    std::array<double, kNumFeatures> values{};

    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    bool operator==(const FeatureVector&) const = default;
};

struct FeatureConfig {
    double i_crit = 1e-7;  // constant-current threshold criterion, A
    double ss_lo = 3e-9;   // subthreshold fit window, A
    double ss_hi = 3e-8;

    /// Throws ConfigError unless 0 < ss_lo < ss_hi < 10 * i_crit.
    void validate() const;

    bool operator==(const FeatureConfig&) const = default;
};

/// Composite trapezoidal rule.
double trapz(std::span<const double> x, std::span<const double> y);
double trapz(const Curve& c);

/// Discrete root-mean-square of the samples.
double rms(std::span<const double> y);
double rms(const Curve& c);

/// Gate voltage at which Ids crosses i_crit, interpolated linearly in log10(Ids).
/// `feature` names the feature in the error raised when no crossing exists.
double vth_constant_current(const Curve& ids_curve, double i_crit, std::string_view feature = "Vth");

/// Least-squares slope of Vgs against log10(Ids) over samples inside
/// [ss_lo, ss_hi], in mV/dec.
double subthreshold_swing(const Curve& ids_curve, const FeatureConfig& cfg, std::string_view feature = "SS");

/// [Vth, SS, Ion, Ioff, Ids_inte, Ids_rms]. `suffix` ("1" or "2") tags error messages.
std::array<double, 6> extract_iv_features(const Curve& ids_curve, const FeatureConfig& cfg,
                                          std::string_view suffix = "");

/// [Cgg_max, Cgg_min, V_mid, Cgg_inte, Cgg_rms, Cgg_slope].
std::array<double, 6> extract_cv_features(const Curve& cgg_curve);

/// [Gm_max, Gm_inte, Gm_rms].
std::array<double, 3> extract_gm_features(const Curve& gm_curve);

/// All 24 features in kFeatureNames order. Gm curves are derived internally.
FeatureVector featurize(const CurveSet& cs, const FeatureConfig& cfg = {});

}  // namespace fetx
