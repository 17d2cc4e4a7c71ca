#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fetx/cli.hpp"
#include "fetx/curve_io.hpp"
#include "fetx/dataset.hpp"
#include "fetx/report_io.hpp"
#include "helpers.hpp"

using namespace fetx;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

std::set<std::string> tree(const fs::path& root) {
    std::set<std::string> s;
    for (const auto& e : fs::recursive_directory_iterator(root)) s.insert(fs::relative(e.path(), root).string());
    return s;
}

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& rel) const { return (dir / rel).string(); }
};

void check_error_line(const Run& r, int code, const std::string& kind) {
    CHECK(r.code == code);
    REQUIRE(!r.err.empty());
    CHECK(r.err.find('\n') == r.err.size() - 1);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j.at("exit") == code);
    CHECK(j.at("error") == kind);
    CHECK(j.at("message").is_string());
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    check_error_line(cli({}), kExitUsage, "usage");
    check_error_line(cli({"frobnicate"}), kExitUsage, "usage");
    check_error_line(cli({"gen", "--bogus", "1"}), kExitUsage, "usage");
    check_error_line(cli({"gen", "--n", "many", "--out", "x"}), kExitUsage, "usage");
    check_error_line(cli({"gen", "--n", "500"}), kExitUsage, "usage");
    check_error_line(cli({"train", "--out", "x"}), kExitUsage, "usage");
    check_error_line(cli({"verify", "--out", "x"}), kExitUsage, "usage");
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"gen", "--help"}).out.find("--seed") != std::string::npos);
}

TEST_CASE("config errors") {
    Scratch s("fetx_cli_cfg");
    std::ofstream(s / "bad.json") << R"({"trian": {}})";
    std::ofstream(s / "small.json") << R"({"n": 10})";
    check_error_line(cli({"gen", "--config", s / "bad.json", "--out", s / "o"}), kExitUsage, "config");
    check_error_line(cli({"gen", "--config", s / "small.json", "--out", s / "o"}), kExitUsage, "config");
    check_error_line(cli({"gen", "--config", s / "missing.json", "--out", s / "o"}), kExitUsage, "config");
    CHECK_FALSE(fs::exists(s / "o"));
}

TEST_CASE("seed is mandatory in CI mode") {
    Scratch s("fetx_cli_ci");
    ::setenv("CI", "true", 1);
    const Run r = cli({"gen", "--n", "100", "--out", s / "o"});
    const Run ok = cli({"gen", "--n", "100", "--seed", "1", "--out", s / "o"});
    ::unsetenv("CI");
    check_error_line(r, kExitUsage, "usage");
    CHECK(ok.code == 0);
}

TEST_CASE("missing input files exit with 3 and leave nothing behind") {
    Scratch s("fetx_cli_missing");
    check_error_line(cli({"train", "--data", s / "nope.csv", "--out", s / "o"}), kExitData, "data");
    check_error_line(cli({"features", "--curves", s / "nope", "--out", s / "o"}), kExitData, "data");
    check_error_line(cli({"extract", "--curves", s.dir.string(), "--model", s / "m.json", "--out", s / "o"}),
                     kExitData, "data");
    std::ofstream(s / "m.json") << "{\"format\": \"fetx-extractor\", \"version\": 1";
    fs::create_directories(s / "dev");
    save_curveset(s / "dev", simulate_curveset(reference_params()));
    check_error_line(cli({"extract", "--curves", s / "dev", "--model", s / "m.json", "--out", s / "o"}), kExitData,
                     "data");
    CHECK_FALSE(fs::exists(s / "o"));
}

TEST_CASE("extraction errors name the feature") {
    Scratch s("fetx_cli_feature");
    CurveSet cs = simulate_curveset(reference_params());
    for (double& y : cs.ids_low.y) y = 1e-12 * (1.0 + y);  // never reaches the threshold current
    save_curveset(s / "dev", cs);
    const Run r = cli({"features", "--curves", s / "dev", "--out", s / "o"});
    check_error_line(r, kExitData, "extraction");
    CHECK(nlohmann::json::parse(r.err).at("feature") == "Vth1");
    CHECK_FALSE(fs::exists(s / "o"));
}

TEST_CASE("gen is deterministic and writes only under --out") {
    Scratch s("fetx_cli_gen");
    const auto before = tree(s.dir);
    const Run a = cli({"gen", "--n", "300", "--seed", "9", "--threads", "1", "--out", s / "a"});
    const Run b = cli({"gen", "--n", "300", "--seed", "9", "--threads", "2", "--out", s / "b"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out.find("wall_seconds=") != std::string::npos);
    CHECK(slurp(s / "a/dataset.csv") == slurp(s / "b/dataset.csv"));
    for (const auto& p : tree(s.dir)) {
        if (before.count(p)) continue;
        CHECK((p.rfind("a", 0) == 0 || p.rfind("b", 0) == 0));
    }
    const auto cfg = read_json_file(s / "a/effective_config.json");
    CHECK(cfg.at("seed") == 9);
    CHECK(cfg.at("n") == 300);
    CHECK(load_dataset(s / "a/dataset.csv").seed == 9);
}

TEST_CASE("train is deterministic; failures roll back") {
    Scratch s("fetx_cli_train");
    std::ofstream(s / "cfg.json") << R"({"train": {"max_epochs": 3, "patience": 2}})";
    REQUIRE(cli({"gen", "--n", "200", "--seed", "4", "--out", s / "g"}).code == 0);
    const Run a = cli({"train", "--config", s / "cfg.json", "--data", s / "g/dataset.csv", "--seed", "3", "--out", s / "a"});
    const Run b = cli({"train", "--config", s / "cfg.json", "--data", s / "g/dataset.csv", "--seed", "3", "--out", s / "b"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out.find("final_val_loss=") != std::string::npos);
    for (const char* f : {"model.json", "history.csv"}) {
        CAPTURE(f);
        CHECK(slurp(s / (std::string("a/") + f)) == slurp(s / (std::string("b/") + f)));
    }
    auto ca = read_json_file(s / "a/effective_config.json");
    auto cb = read_json_file(s / "b/effective_config.json");
    ca["paths"].erase("out");
    cb["paths"].erase("out");
    CHECK(ca == cb);
    CHECK(slurp(s / "a/history.csv").rfind("epoch,learning_rate,train_loss,val_loss\n", 0) == 0);

    Dataset ds = load_dataset(s / "g/dataset.csv");
    for (auto& x : ds.X) x[2] = 0.4;
    save_dataset(s / "flat.csv", ds);
    const Run bad = cli({"train", "--config", s / "cfg.json", "--data", s / "flat.csv", "--out", s / "c"});
    check_error_line(bad, kExitUsage, "config");
    CHECK_FALSE(fs::exists(s / "c"));

    // a pre-existing --out directory survives, the files written into it do not
    fs::create_directories(s / "keep");
    std::ofstream(s / "keep/mine.txt") << "x";
    CHECK(cli({"train", "--config", s / "cfg.json", "--data", s / "flat.csv", "--out", s / "keep"}).code == kExitUsage);
    CHECK(tree(s / "keep") == std::set<std::string>{"mine.txt"});
}

TEST_CASE("features, extract and verify") {
    Scratch s("fetx_cli_pipeline");
    std::ofstream(s / "cfg.json") << R"({"train": {"max_epochs": 3, "patience": 2}})";
    REQUIRE(cli({"gen", "--n", "200", "--seed", "4", "--out", s / "g"}).code == 0);
    REQUIRE(cli({"train", "--config", s / "cfg.json", "--data", s / "g/dataset.csv", "--out", s / "t"}).code == 0);

    const auto ps = testutil::sample_set(2, 77);
    save_curveset(s / "devs/d1", simulate_curveset(ps[0]));
    save_curveset(s / "devs/d2", simulate_curveset(ps[1]));

    SUBCASE("features") {
        REQUIRE(cli({"features", "--curves", s / "devs", "--out", s / "f"}).code == 0);
        std::istringstream is(slurp(s / "f/features.csv"));
        std::string header, row1, row2, extra;
        std::getline(is, header);
        std::getline(is, row1);
        std::getline(is, row2);
        CHECK_FALSE(std::getline(is, extra));
        CHECK(header.rfind("device,Cgg_max,Cgg_min,V_mid,", 0) == 0);
        CHECK(header.find("Gm_rms2") != std::string::npos);
        CHECK(row1.rfind("d1,", 0) == 0);
        const FeatureVector fv = featurize(simulate_curveset(ps[1]));
        CHECK(row2.find("," + format_double(fv[0]) + ",") != std::string::npos);
    }
    SUBCASE("extract") {
        REQUIRE(cli({"extract", "--curves", s / "devs", "--model", s / "t/model.json", "--out", s / "e"}).code == 0);
        const auto params = load_params_file(s / "e/params.json");
        REQUIRE(params.size() == 2);
        CHECK(params[0].name == "d1");
        CHECK(ParamRanges::defaults().contains(params[1].params));
    }
    SUBCASE("verify on a fixed point reports zero error") {
        save_params_file(s / "truth.json", {{"d1", ps[0]}, {"d2", ps[1]}});
        REQUIRE(cli({"verify", "--curves", s / "devs", "--params", s / "truth.json", "--out", s / "v"}).code == 0);
        const auto rep = read_json_file(s / "v/report.json");
        REQUIRE(rep.at("devices").size() == 2);
        for (const auto& d : rep.at("devices"))
            for (const auto& c : d.at("curves")) CHECK(c.at("rms_percent") == 0.0);
        CHECK(fs::exists(s / "v/devices/d2/ids_vgs_high.svg"));
    }
    SUBCASE("verify with a model and the variability suite") {
        save_params_file(s / "truth.json", {{"ref", reference_params()}});
        const Run r = cli({"verify", "--params", s / "truth.json", "--model", s / "t/model.json", "--variability",
                           "--out", s / "v"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("variability") != std::string::npos);
        for (const char* f : {"report.json", "variability.json", "effective_config.json", "devices/ref/cgg_vgs.csv",
                              "devices/ref/cgg_vgs.svg", "devices/ref/ids_vds.csv", "devices/ref/ids_vds.svg",
                              "devices/ref/gm_vgs_low.svg", "variability/baseline/ids_vgs_low.svg"}) {
            CAPTURE(f);
            CHECK(fs::exists(s / (std::string("v/") + f)));
        }
        CHECK(read_json_file(s / "v/variability.json").at("reports").size() == 5);
        CHECK(slurp(s / "v/devices/ref/cgg_vgs.csv").rfind("vgs,target,extracted\n", 0) == 0);
        const std::string svg = slurp(s / "v/devices/ref/ids_vgs_low.svg");
        CHECK(svg.find("width=\"800\" height=\"600\"") != std::string::npos);
    }
    SUBCASE("verify needs a model unless both inputs are given") {
        check_error_line(cli({"verify", "--curves", s / "devs", "--out", s / "v"}), kExitUsage, "usage");
    }
}

TEST_CASE("demo exit code contract") {
    Scratch s("fetx_cli_demo");
    std::ofstream(s / "cfg.json") << R"({"train": {"max_epochs": 2, "patience": 1}})";
    const Run r = cli({"demo", "--config", s / "cfg.json", "--n", "300", "--held-out", "10", "--out", s / "d"});
    // two epochs on 300 samples cannot meet the accuracy thresholds
    CHECK(r.code == kExitAcceptance);
    CHECK(r.out.find("demo FAIL") != std::string::npos);
    const auto summary = read_json_file(s / "d/summary.json");
    CHECK(summary.at("pass") == false);
    CHECK(summary.at("held_out").at("devices") == 10);
    CHECK(fs::exists(s / "d/model.json"));
}
