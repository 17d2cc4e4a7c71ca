#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "fetx/device_model.hpp"

namespace fetx {

/// File names of the three stored curves inside a device directory.
inline constexpr std::string_view kIdsLowFile = "ids_low.csv";
inline constexpr std::string_view kIdsHighFile = "ids_high.csv";
inline constexpr std::string_view kCggLowFile = "cgg_low.csv";

std::string_view curve_unit(CurveKind kind);

/// Curve CSV: `# kind=<kind>, vds=<v|na>, vgs=<v|na>, unit=<unit>` followed by
/// `x,y` rows written with 17 significant digits.
void write_curve_csv(std::ostream& os, const Curve& c);
Curve read_curve_csv(std::istream& is);

void save_curve(const std::filesystem::path& path, const Curve& c);
Curve load_curve(const std::filesystem::path& path);

void save_curveset(const std::filesystem::path& dir, const CurveSet& cs);
CurveSet load_curveset(const std::filesystem::path& dir);

/// True when `dir` holds the three curve files of one device.
bool is_device_dir(const std::filesystem::path& dir);

/// Shortest round-trip decimal representation.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace fetx
