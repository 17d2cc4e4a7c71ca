#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fetx/features.hpp"
#include "fetx/model_params.hpp"
#include "fetx/param_ranges.hpp"
#include "fetx/rng.hpp"

namespace fetx {

enum class Split : std::uint8_t { Train, Val, Test };

std::string_view to_string(Split s);

/// Draws one parameter set: uniform per range, log-uniform where flagged,
/// redrawn (up to 100 times) while CGGMIN + 0.1 fF > CGGMAX.
ModelParams sample_params(const ParamRanges& ranges, Rng& rng);

/// Monte Carlo training corpus: row i holds featurize(simulate_curveset(Y[i])).
struct Dataset {
    std::vector<FeatureVector> X;
    std::vector<ModelParams> Y;
    std::vector<Split> split;
    std::uint64_t seed = 0;
    ParamRanges ranges = ParamRanges::defaults();
    FeatureConfig features;

    std::size_t size() const { return X.size(); }
    std::vector<std::size_t> indices(Split s) const;
};

/// Generates n >= 100 rows. Row i uses its own RNG stream derived from
/// (seed, i), so the result does not depend on `threads`. Split is 80/10/10
/// over a seeded shuffle.
Dataset build_dataset(std::size_t n, std::uint64_t seed, const ParamRanges& ranges = ParamRanges::defaults(),
                      const FeatureConfig& cfg = {}, unsigned threads = 1);

/// Rows of a dataset CSV: a `# meta` line, a header with the 24 feature
/// names, the 14 parameter names and `split`, then one line per sample.
void write_dataset_csv(std::ostream& os, const Dataset& ds);
Dataset read_dataset_csv(std::istream& is);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

/// Features whose values span decades (SS and every current-valued feature).
/// They are z-scored in log10.
bool is_log_scaled_feature(std::size_t j);

/// z-score for features (statistics of the training split only), min-max to
/// [0, 1] for parameters via ParamRanges::to_unit.
struct Normalizer {
    std::array<double, kNumFeatures> mean{};
    std::array<double, kNumFeatures> stddev{};
    std::array<bool, kNumFeatures> log_scale{};
    ParamRanges ranges = ParamRanges::defaults();

    std::array<double, kNumFeatures> normalize(const FeatureVector& fv) const;
    FeatureVector denormalize(std::span<const double> z) const;

    std::array<double, kNumParams> normalize(const ModelParams& p) const { return ranges.to_unit(p); }
    ModelParams denormalize_params(std::span<const double> u) const { return ranges.from_unit(u); }

    bool operator==(const Normalizer&) const = default;
};

/// Throws ConfigError on a zero-variance feature column or an empty training split.
Normalizer fit_normalizer(const Dataset& ds);

}  // namespace fetx
