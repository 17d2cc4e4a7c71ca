#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fetx/config.hpp"
#include "fetx/curve_io.hpp"
#include "fetx/errors.hpp"
#include "fetx/report_io.hpp"
#include "fetx/svg_plot.hpp"
#include "helpers.hpp"

using namespace fetx;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("curve CSV round trip") {
    const CurveSet cs = simulate_curveset(testutil::sample_set(1, 8).front());
    for (const Curve* c : {&cs.ids_low, &cs.ids_high, &cs.cgg_low}) {
        std::stringstream ss;
        write_curve_csv(ss, *c);
        const std::string text = ss.str();
        CHECK(text.rfind("# kind=", 0) == 0);
        std::istringstream is(text);
        CHECK(read_curve_csv(is) == *c);
    }
    std::stringstream ss;
    write_curve_csv(ss, cs.ids_low);
    CHECK(ss.str().find("unit=A") != std::string::npos);

    const Curve out = simulate_ids_vds(reference_params(), {0.6}).front();
    std::stringstream so;
    write_curve_csv(so, out);
    CHECK(so.str().find("vds=na") != std::string::npos);
    std::istringstream si(so.str());
    CHECK(read_curve_csv(si) == out);

    const fs::path dir = fresh_dir("fetx_curveset");
    save_curveset(dir, cs);
    CHECK(is_device_dir(dir));
    CHECK(load_curveset(dir) == cs);
    fs::remove(dir / kCggLowFile);
    CHECK_FALSE(is_device_dir(dir));
    CHECK_THROWS_AS(load_curveset(dir), DataError);
    fs::remove_all(dir);
}

TEST_CASE("malformed curve CSV") {
    auto parse = [](const std::string& s) {
        std::istringstream is(s);
        return read_curve_csv(is);
    };
    CHECK_THROWS_AS(parse("0,1\n0.01,2\n"), DataError);
    CHECK_THROWS_AS(parse("# kind=IdsVgs, vds=0.05, vgs=na, unit=fF\n0,1\n0.01,2\n0.02,3\n"), DataError);
    CHECK_THROWS_AS(parse("# kind=IdsVgs, vds=0.05, vgs=na, unit=A\n0,1\n0.01,abc\n"), DataError);
    CHECK_THROWS_AS(parse("# kind=IdsVgs, vds=0.05, vgs=na, unit=A\n0,1\n0.013,2\n0.02,3\n"), DataError);
    CHECK_THROWS_AS(parse("# kind=Bogus, vds=0.05, vgs=na, unit=A\n0,1\n"), DataError);
    CHECK_NOTHROW(parse("# kind=IdsVgs, vds=0.05, vgs=na, unit=A\n0,1e-9\n0.01,2e-9\n0.02,3e-9\n"));
}

TEST_CASE("numbers keep full precision") {
    for (double v : {0.1, 1.0 / 3.0, 7.5812964135709489e-5, -2.5e-300, 4.45}) CHECK(parse_double(format_double(v)) == v);
    CHECK_THROWS_AS(parse_double("1.0x"), DataError);
    CHECK_THROWS_AS(parse_double(""), DataError);
}

TEST_CASE("parameter JSON") {
    const ModelParams p = testutil::sample_set(1, 9).front();
    CHECK(params_from_json(params_to_json(p)) == p);

    auto j = params_to_json(p);
    j["PCLM"] = 0.1;
    CHECK_THROWS_AS(params_from_json(j), DataError);
    j = params_to_json(p);
    j.erase("ACV");
    CHECK_THROWS_AS(params_from_json(j), DataError);
    j = params_to_json(p);
    j["U0"] = "fast";
    CHECK_THROWS_AS(params_from_json(j), DataError);

    const fs::path dir = fresh_dir("fetx_params");
    save_params_file(dir / "p.json", {{"a", p}, {"b", reference_params()}});
    const auto back = load_params_file(dir / "p.json");
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "a");
    CHECK(back[0].params == p);
    CHECK(back[1].params == reference_params());

    write_json_file(dir / "single.json", {{"params", params_to_json(p)}});
    CHECK(load_params_file(dir / "single.json").front().params == p);
    {
        std::ofstream(dir / "broken.json") << "{\"devices\": [";
    }
    CHECK_THROWS_AS(load_params_file(dir / "broken.json"), DataError);
    CHECK_THROWS_AS(load_params_file(dir / "absent.json"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("report JSON") {
    const ModelParams p = reference_params();
    const VerifyReport r = compare_curves(simulate_curveset(p), p, 1e-7, p);
    const auto j = report_to_json(r);
    REQUIRE(j.at("curves").size() == 5);
    CHECK(j.at("curves")[0].at("curve") == "Cgg-Vgs");
    CHECK(j.at("curves")[1].at("subthreshold_rms_percent") == 0.0);
    CHECK(params_from_json(j.at("predicted")) == p);
}

TEST_CASE("config") {
    const Config d;
    CHECK_NOTHROW(d.validate());
    CHECK(d.n == 25000);

    const Config back = config_from_json(config_to_json(d));
    CHECK(config_to_json(back) == config_to_json(d));

    const auto j = nlohmann::json::parse(R"({"seed": 5, "train": {"max_epochs": 50, "patience": 10},
        "ranges": {"IOFF0": {"lo": 1e-11}}, "features": {"i_crit": 2e-7}})");
    const Config c = config_from_json(j);
    CHECK(c.seed == 5);
    CHECK(c.train.max_epochs == 50);
    CHECK(c.train.batch_size == d.train.batch_size);
    CHECK(c.ranges.bounds[9].lo == 1e-11);
    CHECK(c.ranges.bounds[9].law == SamplingLaw::LogUniform);
    CHECK(c.features.i_crit == 2e-7);

    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"sed": 5})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"train": {"lr": 5}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"ranges": {"FOO": {"lo": 1}}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n": "many"})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"ranges": {"ACV": {"law": "normal"}}})")),
                    ConfigError);

    Config bad = d;
    bad.mlp.widths = {24, 10, 14};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), ConfigError);
}

TEST_CASE("svg chart") {
    const Curve c = simulate_curveset(reference_params()).ids_high;
    const std::string svg = render_svg({"t", "Vgs (V)", "Ids (A)", true},
                                       {{"target", c.x, c.y, "#000", false}, {"extracted", c.x, c.y, "#f00", true}});
    CHECK(svg.find("width=\"800\" height=\"600\"") != std::string::npos);
    CHECK(svg.find(">target<") != std::string::npos);
    CHECK(svg.find(">extracted<") != std::string::npos);
    CHECK(svg.find("1e-5") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK_NOTHROW(render_svg({"empty", "x", "y", false}, {}));
}
