#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "fetx/model_params.hpp"
#include "fetx/param_ranges.hpp"

namespace fetx {

/// Thermal voltage used by the surrogate, V.
inline constexpr double kThermalVoltage = 0.02585;
/// Current prefactor, A/V^2.
inline constexpr double kCurrentPrefactor = 1e-3;
/// Exponent of the linear/saturation smoothing function.
inline constexpr double kSmoothingExponent = 4.0;
/// Work function at which the zero-bias threshold is 0 V, eV.
inline constexpr double kWorkFunctionRef = 4.05;

inline constexpr double kVdsLow = 0.05;
inline constexpr double kVdsHigh = 0.7;
inline constexpr double kGridStep = 0.01;
inline constexpr double kIvStop = 0.8;
inline constexpr double kCvStop = 1.1;

enum class CurveKind { IdsVgs, CggVgs, IdsVds, GmVgs, Gm2Vgs };

std::string_view to_string(CurveKind kind);
CurveKind curve_kind_from_string(std::string_view s);

/// Uniform voltage sweep. `bias` is the fixed terminal voltage: Vds for the
/// Vgs sweeps, Vgs for an Ids-Vds output curve.
struct BiasGrid {
    double start = 0.0;
    double stop = kIvStop;
    double step = kGridStep;
    double bias = 0.0;

    /// round((stop - start) / step) + 1
    std::size_t size() const;
    /// start + k * step
    double at(std::size_t k) const { return start + static_cast<double>(k) * step; }
    std::vector<double> points() const;

    bool operator==(const BiasGrid&) const = default;
};

struct Curve {
    CurveKind kind = CurveKind::IdsVgs;
    BiasGrid grid;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
    double step() const { return grid.step; }

    bool operator==(const Curve&) const = default;
};

/// Throws DataError unless x is strictly increasing and uniform, sizes match,
/// y is finite, and Ids/Cgg values are strictly positive.
void validate_curve(const Curve& c);

/// Builds a Curve from sampled data, inferring the grid from x.
Curve make_curve(CurveKind kind, double bias, std::vector<double> x, std::vector<double> y);

/// The three stored characteristics of one device. Gm curves are derived on
/// demand with differentiate().
struct CurveSet {
    Curve ids_low;   // Ids-Vgs at Vds = 0.05 V
    Curve ids_high;  // Ids-Vgs at Vds = 0.7 V
    Curve cgg_low;   // Cgg-Vgs at Vds = 0

    Curve gm_low() const;
    Curve gm_high() const;

    bool operator==(const CurveSet&) const = default;
};

struct ProcessKnobs {
    double lg_scale = 1.0;
    double eot_scale = 1.0;

    bool operator==(const ProcessKnobs&) const = default;
};

BiasGrid default_iv_grid(double vds);
BiasGrid default_cv_grid();
BiasGrid default_output_grid(double vgs);

/// Throws InvalidParameter if any field is non-finite or IOFF0, ACV, VSATV <= 0.
void check_params(const ModelParams& p);

/// Drain current, A. Requires vds >= 0.
double ids(const ModelParams& p, double vgs, double vds);

/// Total gate capacitance, fF.
double cgg(const ModelParams& p, double vgs);

/// Simulates one Vgs-swept curve (IdsVgs or CggVgs) on an arbitrary grid.
Curve simulate_curve(const ModelParams& p, CurveKind kind, const BiasGrid& grid);

/// Re-simulates `target`'s kind on exactly its x samples and fixed bias.
Curve simulate_like(const ModelParams& p, const Curve& target);

/// Ids-Vgs at both drain biases and Cgg-Vgs on the default grids.
CurveSet simulate_curveset(const ModelParams& p);

/// Output characteristics Ids-Vds (Vds 0..0.8 V, step 0.01) for each Vgs.
std::vector<Curve> simulate_ids_vds(const ModelParams& p, const std::vector<double>& vgs_list);

/// First (Gm) or second (Gm') derivative of an Ids-Vgs curve on the same grid.
/// Central differences inside, second-order one-sided stencils at the ends.
Curve differentiate(const Curve& curve, int order);

/// Emulates a gate-length / oxide-thickness change on the parameter set and
/// clips the result into `ranges`. Names of clipped parameters are appended to
/// `clipped` when given.
ModelParams apply_knobs(const ModelParams& p, const ProcessKnobs& knobs,
                        const ParamRanges& ranges = ParamRanges::defaults(),
                        std::vector<std::string>* clipped = nullptr);

}  // namespace fetx
