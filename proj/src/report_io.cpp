#include "fetx/report_io.hpp"

#include <fstream>
#include <sstream>

#include "fetx/errors.hpp"

namespace fetx {

using nlohmann::json;

json params_to_json(const ModelParams& p) {
    json j = json::object();
    const auto v = p.values();
    for (std::size_t i = 0; i < kNumParams; ++i) j[std::string(kParamNames[i])] = v[i];
    return j;
}

ModelParams params_from_json(const json& j) {
    if (!j.is_object()) throw DataError("parameters must be a JSON object");
    std::array<double, kNumParams> v{};
    std::array<bool, kNumParams> seen{};
    for (const auto& [key, val] : j.items()) {
        const auto i = param_index(key);
        if (i == kNumParams) throw DataError("unknown parameter '" + key + "'");
        if (!val.is_number()) throw DataError("parameter " + key + " is not a number");
        v[i] = val.get<double>();
        seen[i] = true;
    }
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (!seen[i]) throw DataError("missing parameter " + std::string(kParamNames[i]));
    }
    return ModelParams::from_values(v);
}

json report_to_json(const VerifyReport& r) {
    json j;
    j["label"] = r.label;
    j["knobs"] = {{"lg_scale", r.knobs.lg_scale}, {"eot_scale", r.knobs.eot_scale}};
    j["predicted"] = params_to_json(r.predicted);
    j["truth"] = r.truth ? params_to_json(*r.truth) : json(nullptr);
    json curves = json::array();
    for (const auto& c : r.curves) {
        json jc = {{"curve", c.name}, {"kind", std::string(to_string(c.kind))}, {"bias", c.bias},
                   {"rms_percent", c.rms_percent}};
        jc["subthreshold_rms_percent"] = c.subthreshold_rms_percent ? json(*c.subthreshold_rms_percent) : json(nullptr);
        curves.push_back(jc);
    }
    j["curves"] = curves;
    if (r.param_errors) {
        json pe = json::object();
        for (std::size_t i = 0; i < kNumParams; ++i) pe[std::string(kParamNames[i])] = (*r.param_errors)[i];
        j["param_errors_range_fraction"] = pe;
    } else {
        j["param_errors_range_fraction"] = nullptr;
    }
    j["extraction_seconds"] = r.extraction_seconds;
    return j;
}

json variability_to_json(const VariabilityResult& v) {
    json j;
    json reps = json::array();
    for (const auto& r : v.reports) reps.push_back(report_to_json(r));
    j["reports"] = reps;
    json avg = json::object();
    for (std::size_t c = 0; c < kNumReportedCurves; ++c) avg[std::string(kReportedCurves[c])] = v.average_rms[c];
    j["average_rms_percent"] = avg;
    return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    os << j.dump(2) << '\n';
    if (!os) throw DataError("error writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read " + path.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void save_params_file(const std::filesystem::path& path, const std::vector<NamedParams>& devices) {
    json list = json::array();
    for (const auto& d : devices) list.push_back({{"name", d.name}, {"params", params_to_json(d.params)}});
    write_json_file(path, {{"devices", list}});
}

std::vector<NamedParams> load_params_file(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    std::vector<NamedParams> out;
    try {
        if (j.contains("devices")) {
            for (const auto& d : j.at("devices")) {
                out.push_back({d.value("name", std::string("device")), params_from_json(d.at("params"))});
            }
        } else if (j.contains("params")) {
            out.push_back({j.value("name", std::string("device")), params_from_json(j.at("params"))});
        } else {
            throw DataError("expected 'devices' or 'params'");
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (out.empty()) throw DataError(path.string() + ": no devices");
    return out;
}

}  // namespace fetx
