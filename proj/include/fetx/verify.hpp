#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fetx/ann.hpp"
#include "fetx/device_model.hpp"
#include "fetx/param_ranges.hpp"

namespace fetx {

inline constexpr std::size_t kNumReportedCurves = 5;

/// Report order of the five compared curves.
inline constexpr std::array<std::string_view, kNumReportedCurves> kReportedCurves = {
    "Cgg-Vgs", "Ids-Vgs@Vds=0.05", "Ids-Vgs@Vds=0.7", "Gm-Vgs@Vds=0.05", "Gm-Vgs@Vds=0.7"};

struct CurveError {
    std::string name;
    CurveKind kind = CurveKind::IdsVgs;
    double bias = 0.0;
    double rms_percent = 0.0;
    std::optional<double> subthreshold_rms_percent;  // I-V curves only
};

struct VerifyReport {
    std::string label;
    ProcessKnobs knobs;
    ModelParams predicted;
    std::optional<ModelParams> truth;
    std::vector<CurveError> curves;
    /// |predicted - true| / (hi - lo) per parameter, when truth is known.
    std::optional<std::array<double, kNumParams>> param_errors;
    double extraction_seconds = 0.0;
};

/// 100 * ||pred - target|| / ||target|| over a shared grid.
double rms_percent(const Curve& pred, const Curve& target);

/// rms_percent of log10(Ids) over the samples where the target is below i_crit.
double subthreshold_rms_percent(const Curve& pred, const Curve& target, double i_crit);

/// Resimulates `predicted` on the target grids and scores the five curves.
VerifyReport compare_curves(const CurveSet& target, const ModelParams& predicted, double i_crit,
                            const std::optional<ModelParams>& truth = std::nullopt,
                            const ParamRanges& ranges = ParamRanges::defaults());

/// Featurize -> predict -> resimulate -> score.
VerifyReport round_trip(const CurveSet& target, const ExtractorModel& model,
                        const std::optional<ModelParams>& truth = std::nullopt);

/// Medians over a batch of reports.
struct ErrorSummary {
    std::size_t count = 0;
    std::array<double, kNumReportedCurves> median_rms{};
    /// Log-domain subthreshold error of the low- and high-Vds Ids curves.
    std::array<double, 2> median_subthreshold{};
};

double median(std::vector<double> v);
/// Throws DataError on an empty batch.
ErrorSummary summarize(const std::vector<VerifyReport>& reports);

struct VariabilityResult {
    std::vector<VerifyReport> reports;  // baseline first, then the four knob settings
    /// Mean rms_percent per reported curve over all five reports.
    std::array<double, kNumReportedCurves> average_rms{};
};

/// The knob settings of the variability study, baseline first, as (lg, eot).
std::array<ProcessKnobs, 5> variability_knobs();

VariabilityResult variability_suite(const ModelParams& base, const ExtractorModel& model);

/// Sum of rms_percent over the three stored curves.
double fit_objective(const CurveSet& target, const ModelParams& p);

struct DirectFitResult {
    ModelParams params;
    double objective = 0.0;
    std::size_t evaluations = 0;
    double seconds = 0.0;
    std::vector<double> trace;  // best objective per simplex iteration
};

/// Box-constrained simplex fit of all 14 parameters directly to the curves,
/// in the unit coordinates of `ranges`. Never worse than `init`.
DirectFitResult direct_fit(const CurveSet& target, const ParamRanges& ranges, const ModelParams& init,
                           std::size_t max_evaluations = 2000);

}  // namespace fetx
