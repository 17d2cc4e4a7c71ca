#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fetx/ann.hpp"
#include "fetx/features.hpp"
#include "fetx/param_ranges.hpp"

namespace fetx {

/// Fully resolved settings of one CLI run. Every field has a default; a JSON
/// config file overrides any subset, and command-line flags override both.
struct Config {
    std::uint64_t seed = 42;  // dataset seed
    unsigned threads = 0;     // 0: one worker per hardware thread
    std::size_t n = 25000;    // gen sample count

    struct Paths {
        std::string data;
        std::string model;
        std::string curves;
        std::string params;
        std::string out;
    } paths;

    ParamRanges ranges = ParamRanges::defaults();
    FeatureConfig features;
    MLPConfig mlp;
    TrainConfig train;

    std::size_t held_out = 200;                       // demo: test devices scored
    std::vector<double> ids_vds_vgs{0.4, 0.6, 0.8};   // verify: output family gate biases

    void validate() const;
};

nlohmann::json config_to_json(const Config& c);
/// Applies the keys present in `j` on top of `base`. Unknown keys throw ConfigError.
Config config_from_json(const nlohmann::json& j, Config base = {});
Config load_config(const std::filesystem::path& path);

unsigned resolve_threads(unsigned requested);

}  // namespace fetx
