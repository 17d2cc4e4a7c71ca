#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fetx/dataset.hpp"
#include "fetx/errors.hpp"
#include "helpers.hpp"

using namespace fetx;

namespace {

bool same_dataset(const Dataset& a, const Dataset& b) {
    return a.X == b.X && a.Y == b.Y && a.split == b.split && a.seed == b.seed && a.ranges == b.ranges &&
           a.features == b.features;
}

const Dataset& small_dataset() {
    static const Dataset ds = build_dataset(400, 2024);
    return ds;
}

}  // namespace

TEST_CASE("sample_params stays in range and honours the capacitance margin") {
    const ParamRanges r = ParamRanges::defaults();
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const ModelParams p = sample_params(r, rng);
        REQUIRE(r.contains(p));
        REQUIRE(p.cggmin + kCggMargin <= p.cggmax);
    }
}

TEST_CASE("degenerate range gives a constant") {
    ParamRanges r = ParamRanges::defaults();
    r.bounds[0] = {4.4, 4.4, SamplingLaw::Uniform};
    Rng rng(3);
    for (int i = 0; i < 100; ++i) CHECK(sample_params(r, rng).phig == 4.4);
}

TEST_CASE("law of large numbers on sampled parameters") {
    const ParamRanges r = ParamRanges::defaults();
    Rng rng(12345);
    const int n = 100000;
    double sum = 0.0, lsum = 0.0;
    for (int i = 0; i < n; ++i) {
        const ModelParams p = sample_params(r, rng);
        sum += p.phig;
        lsum += std::log10(p.ioff0);
    }
    const double sigma = 0.3 / std::sqrt(12.0);
    CHECK(std::abs(sum / n - 4.45) < 3.0 * sigma / std::sqrt(double(n)));
    const double lsigma = 2.0 / std::sqrt(12.0);
    CHECK(std::abs(lsum / n + 9.0) < 3.0 * lsigma / std::sqrt(double(n)));
}

TEST_CASE("incompatible capacitance ranges are a configuration error") {
    ParamRanges r = ParamRanges::defaults();
    r.bounds[10] = {0.6, 0.6, SamplingLaw::Uniform};
    r.bounds[11] = {0.55, 0.6, SamplingLaw::Uniform};
    Rng rng(1);
    CHECK_THROWS_AS(sample_params(r, rng), ConfigError);

    ParamRanges bad = ParamRanges::defaults();
    bad.bounds[3] = {0.3, 0.1, SamplingLaw::Uniform};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(build_dataset(99, 1), ConfigError);
}

TEST_CASE("dataset rows, splits and determinism") {
    const Dataset& ds = small_dataset();
    REQUIRE(ds.size() == 400);
    for (std::size_t i = 0; i < ds.size(); i += 37) CHECK(ds.X[i] == featurize(simulate_curveset(ds.Y[i])));

    const auto tr = ds.indices(Split::Train);
    const auto va = ds.indices(Split::Val);
    const auto te = ds.indices(Split::Test);
    CHECK(tr.size() == 320);
    CHECK(va.size() == 40);
    CHECK(te.size() == 40);
    std::set<std::size_t> all(tr.begin(), tr.end());
    all.insert(va.begin(), va.end());
    all.insert(te.begin(), te.end());
    CHECK(all.size() == 400);

    const Dataset again = build_dataset(400, 2024, ParamRanges::defaults(), {}, 3);
    CHECK(same_dataset(ds, again));
    const Dataset other = build_dataset(400, 2025);
    CHECK_FALSE(other.Y == ds.Y);
}

TEST_CASE("dataset CSV round trip") {
    const Dataset& ds = small_dataset();
    std::stringstream ss;
    write_dataset_csv(ss, ds);
    const std::string text = ss.str();
    std::istringstream is(text);
    const Dataset back = read_dataset_csv(is);
    CHECK(same_dataset(ds, back));
    CHECK(text.find(kRngAlgorithm) != std::string::npos);

    std::stringstream again;
    write_dataset_csv(again, back);
    CHECK(again.str() == text);

    SUBCASE("truncated file") {
        std::istringstream t(text.substr(0, text.size() / 2));
        CHECK_THROWS_AS(read_dataset_csv(t), DataError);
    }
    SUBCASE("missing meta line") {
        std::istringstream t(text.substr(text.find('\n') + 1));
        CHECK_THROWS_AS(read_dataset_csv(t), DataError);
    }
    SUBCASE("bad split label") {
        std::string bad = text;
        const auto pos = bad.rfind(",train");
        bad.replace(pos, 6, ",bogus");
        std::istringstream t(bad);
        CHECK_THROWS_AS(read_dataset_csv(t), DataError);
    }
    SUBCASE("file round trip") {
        const auto path = std::filesystem::temp_directory_path() / "fetx_ds_roundtrip.csv";
        save_dataset(path, ds);
        CHECK(same_dataset(load_dataset(path), ds));
        std::filesystem::remove(path);
        CHECK_THROWS_AS(load_dataset(path), DataError);
    }
}

TEST_CASE("normalizer") {
    const Dataset& ds = small_dataset();
    const Normalizer nz = fit_normalizer(ds);

    SUBCASE("train columns are standardized") {
        const auto tr = ds.indices(Split::Train);
        for (std::size_t j = 0; j < kNumFeatures; ++j) {
            double s = 0.0, s2 = 0.0;
            for (auto i : tr) {
                const double z = nz.normalize(ds.X[i])[j];
                s += z;
                s2 += z * z;
            }
            const double m = s / tr.size();
            CHECK(std::abs(m) < 1e-9);
            CHECK(std::sqrt(s2 / tr.size() - m * m) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("round trip") {
        for (std::size_t i = 0; i < ds.size(); i += 13) {
            const auto z = nz.normalize(ds.X[i]);
            const FeatureVector back = nz.denormalize(z);
            for (std::size_t j = 0; j < kNumFeatures; ++j)
                CHECK(std::abs(back[j] - ds.X[i][j]) <= 1e-12 * std::abs(ds.X[i][j]));
            const auto u = nz.normalize(ds.Y[i]);
            for (double v : u) CHECK((v >= 0.0 && v <= 1.0));
            const auto pv = nz.denormalize_params(u).values();
            const auto tv = ds.Y[i].values();
            for (std::size_t k = 0; k < kNumParams; ++k) CHECK(std::abs(pv[k] - tv[k]) <= 1e-12 * std::abs(tv[k]) + 1e-15);
        }
    }
    SUBCASE("no leakage from validation and test rows") {
        Dataset mod = ds;
        for (auto i : mod.indices(Split::Val)) mod.X[i].values.fill(1e6);
        for (auto i : mod.indices(Split::Test)) mod.X[i].values.fill(-1e6);
        CHECK(fit_normalizer(mod) == nz);
    }
    SUBCASE("zero-variance column") {
        Dataset mod = ds;
        for (auto& x : mod.X) x[2] = 0.4;
        CHECK_THROWS_AS(fit_normalizer(mod), ConfigError);
    }
    SUBCASE("log-scaled features must be positive") {
        FeatureVector fv = ds.X[0];
        fv[8] = -1.0;
        CHECK(is_log_scaled_feature(8));
        CHECK_FALSE(is_log_scaled_feature(6));
        CHECK_THROWS_AS(nz.normalize(fv), DataError);
    }
}
