#include <doctest.h>

#include <cmath>
#include <limits>

#include "fetx/device_model.hpp"
#include "fetx/errors.hpp"
#include "fetx/features.hpp"
#include "helpers.hpp"
#include "oracle_values.hpp"

using namespace fetx;
using testutil::rel_close;

TEST_CASE("ids golden values") {
    const ModelParams p = reference_params();
    CHECK(rel_close(ids(p, 0.8, 0.7), oracle::kIdsRef_08_07, 1e-12));
    CHECK(rel_close(ids(p, 0.8, 0.05), oracle::kIdsRef_08_005, 1e-12));
    CHECK(rel_close(ids(p, 0.7, 0.8), oracle::kIdsRef_07_08, 1e-12));
}

TEST_CASE("ids leakage floor and zero drain bias") {
    ModelParams p = reference_params();
    p.ioff0 = 1e-9;
    CHECK(rel_close(ids(p, -1.0, 0.7), 1e-9, 0.01));
    for (double v : {-1.0, 0.0, 0.4, 0.8, 2.0}) CHECK(ids(p, v, 0.0) == p.ioff0);
}

TEST_CASE("ids rejects bad inputs") {
    ModelParams p = reference_params();
    CHECK_THROWS_AS(ids(p, 0.5, -0.1), InvalidParameter);
    p.u0 = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ids(p, 0.5, 0.1), InvalidParameter);
    p = reference_params();
    p.ioff0 = 0.0;
    CHECK_THROWS_AS(ids(p, 0.5, 0.1), InvalidParameter);
    p = reference_params();
    p.acv = -0.1;
    CHECK_THROWS_AS(cgg(p, 0.5), InvalidParameter);
}

TEST_CASE("cgg closed forms") {
    ModelParams p = reference_params();
    p.cggmax = 1.2;
    p.cggmin = 0.2;
    p.phig = 4.45;
    p.dvtcv = 0.0;
    p.acv = 0.1;
    CHECK(rel_close(cgg(p, 0.5), oracle::kCggExample, 1e-13));
    CHECK(cgg(p, 0.4) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(std::abs(cgg(p, 0.4 + 20 * p.acv) - p.cggmax) < 1e-6);
}

TEST_CASE("grid arithmetic and purity") {
    const ModelParams p = reference_params();
    const CurveSet a = simulate_curveset(p);
    const CurveSet b = simulate_curveset(p);
    CHECK(a.ids_low.size() == 81);
    CHECK(a.ids_high.size() == 81);
    CHECK(a.cgg_low.size() == 111);
    CHECK(a == b);
    for (std::size_t k = 0; k < a.cgg_low.size(); ++k) CHECK(a.cgg_low.x[k] == 0.0 + static_cast<double>(k) * 0.01);
    CHECK(a.ids_high.y.back() == ids(p, 0.8, kVdsHigh));
    CHECK(rel_close(a.ids_high.y.back(), oracle::kIdsRef_08_07, 1e-12));
}

TEST_CASE("ids-vds family") {
    const ModelParams p = reference_params();
    const auto fam = simulate_ids_vds(p, {0.5, 0.6, 0.7});
    REQUIRE(fam.size() == 3);
    for (const auto& c : fam) {
        CHECK(c.kind == CurveKind::IdsVds);
        CHECK(c.size() == 81);
        CHECK(c.y.front() == p.ioff0);
    }
    CHECK(rel_close(fam[2].y.back(), oracle::kIdsRef_07_08, 1e-12));
    for (std::size_t k = 1; k < fam[0].size(); ++k) {
        CHECK(fam[1].y[k] > fam[0].y[k]);
        CHECK(fam[2].y[k] > fam[1].y[k]);
    }
}

TEST_CASE("monotonicity and finiteness over sampled parameters") {
    for (const auto& p : testutil::sample_set(200)) {
        double prev = -1.0;
        for (int k = -100; k <= 200; ++k) {
            const double v = k * 0.01;
            for (double vds : {0.0, 0.05, 0.5, 1.0}) {
                const double i = ids(p, v, vds);
                REQUIRE(std::isfinite(i));
                REQUIRE(i > 0.0);
            }
            const double c = cgg(p, v);
            REQUIRE(std::isfinite(c));
            REQUIRE(c >= p.cggmin);
            REQUIRE(c <= p.cggmax);
            const double i = ids(p, v, 0.7);
            if (k > -100 && v >= 0.0 && v <= 1.1) CHECK(i > prev);
            prev = i;
        }
        const CurveSet cs = simulate_curveset(p);
        for (std::size_t k = 1; k < cs.cgg_low.size(); ++k) REQUIRE(cs.cgg_low.y[k] > cs.cgg_low.y[k - 1]);
        for (std::size_t k = 1; k < cs.ids_low.size(); ++k) REQUIRE(cs.ids_low.y[k] > cs.ids_low.y[k - 1]);
        for (double v : {0.0, 0.3, 0.8}) {
            double last = 0.0;
            for (int j = 0; j <= 80; ++j) {
                const double i = ids(p, v, j * 0.01);
                REQUIRE(i >= last);
                last = i;
            }
        }
    }
}

TEST_CASE("PHIG shift moves the constant-current threshold by the same amount") {
    for (const auto& p : testutil::sample_set(30, 5)) {
        ModelParams q = p;
        const double delta = 0.03;
        q.phig = p.phig - delta;  // stay in the swept window
        for (double vds : {kVdsLow, kVdsHigh}) {
            const double v0 = vth_constant_current(simulate_curve(p, CurveKind::IdsVgs, default_iv_grid(vds)), 1e-7);
            const double v1 = vth_constant_current(simulate_curve(q, CurveKind::IdsVgs, default_iv_grid(vds)), 1e-7);
            CHECK(std::abs((v0 - v1) - delta) < 2e-3);
        }
    }
}

TEST_CASE("differentiate") {
    const BiasGrid g = default_iv_grid(kVdsLow);
    SUBCASE("linear data is exact") {
        const Curve c = testutil::sampled(CurveKind::IdsVgs, g, [](double v) { return 3.0 * v + 0.5; });
        const Curve d = differentiate(c, 1);
        CHECK(d.kind == CurveKind::GmVgs);
        CHECK(d.grid == c.grid);
        for (double y : d.y) CHECK(y == doctest::Approx(3.0).epsilon(1e-10));
    }
    SUBCASE("quadratic: central difference exact inside") {
        const Curve c = testutil::sampled(CurveKind::IdsVgs, g, [](double v) { return v * v; });
        const Curve d = differentiate(c, 1);
        for (std::size_t k = 0; k < d.size(); ++k) CHECK(d.y[k] == doctest::Approx(2.0 * d.x[k]).epsilon(1e-9));
        CHECK(extract_gm_features(d)[0] == doctest::Approx(1.6).epsilon(1e-9));
    }
    SUBCASE("cubic second derivative") {
        const Curve c = testutil::sampled(CurveKind::IdsVgs, g, [](double v) { return v * v * v; });
        const Curve d = differentiate(c, 2);
        CHECK(d.kind == CurveKind::Gm2Vgs);
        CHECK(rel_close(d.y[40], 2.4, 1e-6));
        CHECK(std::abs(d.y.front()) < 1e-6);
        CHECK(std::abs(d.y.back() - 4.8) < 1e-6);
    }
    SUBCASE("too few points") {
        Curve c = make_curve(CurveKind::IdsVgs, 0.05, {0.0, 0.01}, {1e-9, 2e-9});
        CHECK_THROWS_AS(differentiate(c, 1), DataError);
    }
}

TEST_CASE("curve validation") {
    CHECK_THROWS_AS(make_curve(CurveKind::IdsVgs, 0.05, {0.0, 0.01, 0.03}, {1.0, 2.0, 3.0}), DataError);
    CHECK_THROWS_AS(make_curve(CurveKind::IdsVgs, 0.05, {0.0, 0.01, 0.02}, {1.0, -2.0, 3.0}), DataError);
    CHECK_THROWS_AS(make_curve(CurveKind::CggVgs, 0.0, {0.0, 0.01}, {1.0}), DataError);
    CHECK_NOTHROW(make_curve(CurveKind::GmVgs, 0.05, {0.0, 0.01, 0.02}, {-1.0, 0.0, 1.0}));
    CHECK(curve_kind_from_string(to_string(CurveKind::Gm2Vgs)) == CurveKind::Gm2Vgs);
}

TEST_CASE("apply_knobs") {
    const ModelParams p = reference_params();
    CHECK(apply_knobs(p, {1.0, 1.0}) == p);

    const ModelParams s = apply_knobs(p, {0.9, 1.0});
    CHECK((p.phig - s.phig) * 1000.0 == doctest::Approx(5.555555556).epsilon(1e-8));
    CHECK(s.lambda == doctest::Approx(p.lambda / 0.9));
    CHECK(s.u0 == doctest::Approx(p.u0 / 0.9));
    CHECK(s.cggmax == doctest::Approx(p.cggmax * 0.9));

    const ModelParams e = apply_knobs(p, {1.0, 1.1});
    CHECK(e.cit == p.cit * 1.1);
    CHECK(e.cdsc == p.cdsc * 1.1);

    std::vector<std::string> clipped;
    ModelParams hi = p;
    hi.cggmax = 1.45;
    const ModelParams c = apply_knobs(hi, {1.0, 0.8}, ParamRanges::defaults(), &clipped);
    CHECK(c.cggmax == 1.5);
    CHECK(std::find(clipped.begin(), clipped.end(), "CGGMAX") != clipped.end());
    CHECK(ParamRanges::defaults().contains(c));
}
