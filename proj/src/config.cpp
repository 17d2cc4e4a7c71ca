#include "fetx/config.hpp"

#include <algorithm>
#include <fstream>
#include <cmath>
#include <thread>

#include "fetx/errors.hpp"

namespace fetx {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
void take(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

std::string_view law_name(SamplingLaw l) { return l == SamplingLaw::LogUniform ? "log-uniform" : "uniform"; }

}  // namespace

void Config::validate() const {
    if (n < 100) throw ConfigError("n must be at least 100");
    if (held_out == 0) throw ConfigError("held_out must be positive");
    for (double v : ids_vds_vgs) {
        if (!std::isfinite(v)) throw ConfigError("ids_vds_vgs: non-finite gate bias");
    }
    ranges.validate();
    features.validate();
    mlp.validate_extractor();
    train.validate();
}

json config_to_json(const Config& c) {
    json ranges = json::object();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const auto& b = c.ranges.bounds[i];
        ranges[std::string(kParamNames[i])] = {{"lo", b.lo}, {"hi", b.hi}, {"law", law_name(b.law)}};
    }
    return {
        {"seed", c.seed},
        {"threads", c.threads},
        {"n", c.n},
        {"paths",
         {{"data", c.paths.data},
          {"model", c.paths.model},
          {"curves", c.paths.curves},
          {"params", c.paths.params},
          {"out", c.paths.out}}},
        {"ranges", ranges},
        {"features", {{"i_crit", c.features.i_crit}, {"ss_lo", c.features.ss_lo}, {"ss_hi", c.features.ss_hi}}},
        {"mlp", {{"widths", c.mlp.widths}, {"init", c.mlp.init}, {"seed", c.mlp.seed}}},
        {"train",
         {{"learning_rate", c.train.learning_rate},
          {"lr_final_fraction", c.train.lr_final_fraction},
          {"batch_size", c.train.batch_size},
          {"max_epochs", c.train.max_epochs},
          {"patience", c.train.patience},
          {"beta1", c.train.beta1},
          {"beta2", c.train.beta2},
          {"epsilon", c.train.epsilon},
          {"seed", c.train.seed}}},
        {"held_out", c.held_out},
        {"ids_vds_vgs", c.ids_vds_vgs},
    };
}

Config config_from_json(const json& j, Config c) {
    reject_unknown(j, "config",
                   {"seed", "threads", "n", "paths", "ranges", "features", "mlp", "train", "held_out", "ids_vds_vgs"});
    take(j, "seed", c.seed, "config");
    take(j, "threads", c.threads, "config");
    take(j, "n", c.n, "config");
    take(j, "held_out", c.held_out, "config");
    take(j, "ids_vds_vgs", c.ids_vds_vgs, "config");

    if (j.contains("paths")) {
        const auto& p = j["paths"];
        reject_unknown(p, "paths", {"data", "model", "curves", "params", "out"});
        take(p, "data", c.paths.data, "paths");
        take(p, "model", c.paths.model, "paths");
        take(p, "curves", c.paths.curves, "paths");
        take(p, "params", c.paths.params, "paths");
        take(p, "out", c.paths.out, "paths");
    }
    if (j.contains("ranges")) {
        const auto& r = j["ranges"];
        if (!r.is_object()) throw ConfigError("ranges: expected an object");
        for (const auto& [name, spec] : r.items()) {
            const std::size_t i = param_index(name);
            if (i >= kNumParams) throw ConfigError("ranges: unknown parameter '" + name + "'");
            const std::string where = "ranges." + name;
            reject_unknown(spec, where, {"lo", "hi", "law"});
            auto& b = c.ranges.bounds[i];
            take(spec, "lo", b.lo, where);
            take(spec, "hi", b.hi, where);
            if (spec.contains("law")) {
                std::string law;
                take(spec, "law", law, where);
                if (law == "uniform")
                    b.law = SamplingLaw::Uniform;
                else if (law == "log-uniform")
                    b.law = SamplingLaw::LogUniform;
                else
                    throw ConfigError(where + ".law: expected 'uniform' or 'log-uniform'");
            }
        }
    }
    if (j.contains("features")) {
        const auto& f = j["features"];
        reject_unknown(f, "features", {"i_crit", "ss_lo", "ss_hi"});
        take(f, "i_crit", c.features.i_crit, "features");
        take(f, "ss_lo", c.features.ss_lo, "features");
        take(f, "ss_hi", c.features.ss_hi, "features");
    }
    if (j.contains("mlp")) {
        const auto& m = j["mlp"];
        reject_unknown(m, "mlp", {"widths", "init", "seed"});
        take(m, "widths", c.mlp.widths, "mlp");
        take(m, "init", c.mlp.init, "mlp");
        take(m, "seed", c.mlp.seed, "mlp");
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        reject_unknown(t, "train",
                       {"learning_rate", "lr_final_fraction", "batch_size", "max_epochs", "patience", "beta1", "beta2",
                        "epsilon", "seed"});
        take(t, "learning_rate", c.train.learning_rate, "train");
        take(t, "lr_final_fraction", c.train.lr_final_fraction, "train");
        take(t, "batch_size", c.train.batch_size, "train");
        take(t, "max_epochs", c.train.max_epochs, "train");
        take(t, "patience", c.train.patience, "train");
        take(t, "beta1", c.train.beta1, "train");
        take(t, "beta2", c.train.beta2, "train");
        take(t, "epsilon", c.train.epsilon, "train");
        take(t, "seed", c.train.seed, "train");
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace fetx
