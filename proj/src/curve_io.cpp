#include "fetx/curve_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fetx/errors.hpp"

namespace fetx {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool sweeps_vds(CurveKind k) { return k == CurveKind::IdsVds; }

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw DataError("cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

std::string_view curve_unit(CurveKind kind) {
    switch (kind) {
        case CurveKind::IdsVgs:
        case CurveKind::IdsVds: return "A";
        case CurveKind::CggVgs: return "fF";
        case CurveKind::GmVgs: return "A_per_V";
        case CurveKind::Gm2Vgs: return "A_per_V2";
    }
    return "?";
}

void write_curve_csv(std::ostream& os, const Curve& c) {
    const std::string bias = format_double(c.grid.bias);
    os << "# kind=" << to_string(c.kind) << ", vds=" << (sweeps_vds(c.kind) ? "na" : bias)
       << ", vgs=" << (sweeps_vds(c.kind) ? bias : "na") << ", unit=" << curve_unit(c.kind) << '\n';
    for (std::size_t k = 0; k < c.x.size(); ++k) os << format_double(c.x[k]) << ',' << format_double(c.y[k]) << '\n';
}

Curve read_curve_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw DataError("curve CSV: missing '# kind=...' header");

    std::string kind_s, vds_s, vgs_s, unit_s;
    std::stringstream header(line.substr(2));
    std::string item;
    while (std::getline(header, item, ',')) {
        const auto kv = trim(item);
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw DataError("curve CSV: malformed header field '" + std::string(kv) + "'");
        const auto key = kv.substr(0, eq);
        const std::string val(trim(kv.substr(eq + 1)));
        if (key == "kind") kind_s = val;
        else if (key == "vds") vds_s = val;
        else if (key == "vgs") vgs_s = val;
        else if (key == "unit") unit_s = val;
        else throw DataError("curve CSV: unknown header key '" + std::string(key) + "'");
    }
    if (kind_s.empty() || vds_s.empty() || vgs_s.empty() || unit_s.empty()) {
        throw DataError("curve CSV: header needs kind, vds, vgs and unit");
    }
    const CurveKind kind = curve_kind_from_string(kind_s);
    if (unit_s != curve_unit(kind)) throw DataError("curve CSV: unit '" + unit_s + "' does not match kind " + kind_s);
    const std::string& bias_s = sweeps_vds(kind) ? vgs_s : vds_s;
    if (bias_s == "na") throw DataError("curve CSV: fixed bias missing for kind " + kind_s);
    const double bias = parse_double(bias_s);

    std::vector<double> x, y;
    while (std::getline(is, line)) {
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
            throw DataError("curve CSV: expected 'x,y' row, got '" + std::string(row) + "'");
        }
        x.push_back(parse_double(row.substr(0, comma)));
        y.push_back(parse_double(row.substr(comma + 1)));
    }
    return make_curve(kind, bias, std::move(x), std::move(y));
}

void save_curve(const std::filesystem::path& path, const Curve& c) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    write_curve_csv(os, c);
    if (!os) throw DataError("error writing " + path.string());
}

Curve load_curve(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read " + path.string());
    try {
        return read_curve_csv(is);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void save_curveset(const std::filesystem::path& dir, const CurveSet& cs) {
    std::filesystem::create_directories(dir);
    save_curve(dir / kIdsLowFile, cs.ids_low);
    save_curve(dir / kIdsHighFile, cs.ids_high);
    save_curve(dir / kCggLowFile, cs.cgg_low);
}

CurveSet load_curveset(const std::filesystem::path& dir) {
    CurveSet cs{load_curve(dir / kIdsLowFile), load_curve(dir / kIdsHighFile), load_curve(dir / kCggLowFile)};
    if (cs.ids_low.kind != CurveKind::IdsVgs || cs.ids_high.kind != CurveKind::IdsVgs ||
        cs.cgg_low.kind != CurveKind::CggVgs) {
        throw DataError(dir.string() + ": curve kinds do not match file names");
    }
    return cs;
}

bool is_device_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    return fs::is_regular_file(dir / kIdsLowFile) && fs::is_regular_file(dir / kIdsHighFile) &&
           fs::is_regular_file(dir / kCggLowFile);
}

}  // namespace fetx
