#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fetx/model_params.hpp"
#include "fetx/verify.hpp"

namespace fetx {

nlohmann::json params_to_json(const ModelParams& p);
/// Requires all 14 names; rejects unknown keys.
ModelParams params_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const VerifyReport& r);
nlohmann::json variability_to_json(const VariabilityResult& v);

struct NamedParams {
    std::string name;
    ModelParams params;
};

/// `{"devices": [{"name": ..., "params": {...}}, ...]}`
void save_params_file(const std::filesystem::path& path, const std::vector<NamedParams>& devices);
/// Accepts the multi-device layout above or a bare `{"params": {...}}`.
std::vector<NamedParams> load_params_file(const std::filesystem::path& path);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace fetx
