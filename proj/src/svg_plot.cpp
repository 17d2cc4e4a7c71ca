#include "fetx/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fetx/errors.hpp"

namespace fetx {

namespace {

constexpr double kLeft = 90, kRight = 30, kTop = 50, kBottom = 70;

std::string fmt(double v, const char* f = "%.4g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (spec.log_y && !(s.y[k] > 0.0)) continue;
            xmin = std::min(xmin, s.x[k]);
            xmax = std::max(xmax, s.x[k]);
            ymin = std::min(ymin, ty(s.y[k]));
            ymax = std::max(ymax, ty(s.y[k]));
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (spec.log_y) {
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
    }
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    if (!spec.log_y) {
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    }

    const double pw = kSvgWidth - kLeft - kRight;
    const double ph = kSvgHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double yt) { return kTop + (1.0 - (yt - ymin) / (ymax - ymin)) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight
       << "\" viewBox=\"0 0 " << kSvgWidth << ' ' << kSvgHeight << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kSvgWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" << escape(spec.title)
       << "</text>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    const double xs = nice_step(xmax - xmin);
    for (double x = std::ceil(xmin / xs) * xs; x <= xmax + 1e-9 * xs; x += xs) {
        os << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << fmt(px(x)) << "\" y2=\"" << kTop
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << fmt(px(x)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
           << fmt(std::abs(x) < 1e-12 ? 0.0 : x, "%.3g") << "</text>\n";
    }
    const double ys = spec.log_y ? std::max(1.0, std::ceil((ymax - ymin) / 8.0)) : nice_step(ymax - ymin);
    for (double y = std::ceil(ymin / ys) * ys; y <= ymax + 1e-9 * ys; y += ys) {
        os << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << fmt(py(y))
           << "\" stroke=\"#ddd\"/>\n";
        const std::string label = spec.log_y ? "1e" + fmt(y, "%.0f") : fmt(std::abs(y) < 1e-15 ? 0.0 : y, "%.3g");
        os << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py(y) + 4) << "\" text-anchor=\"end\">" << label
           << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kSvgHeight - 20 << "\" text-anchor=\"middle\">"
       << escape(spec.x_label) << "</text>\n";
    os << "<text x=\"22\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 22 "
       << kTop + ph / 2 << ")\">" << escape(spec.y_label) << "</text>\n";

    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\""
           << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (spec.log_y && !(s.y[k] > 0.0)) continue;
            os << fmt(px(s.x[k]), "%.2f") << ',' << fmt(py(ty(s.y[k])), "%.2f") << ' ';
        }
        os << "\"/>\n";
    }

    double ly = kTop + 20;
    const double lx = kLeft + pw - 190;
    os << "<rect x=\"" << lx - 8 << "\" y=\"" << ly - 12 << "\" width=\"190\" height=\"" << 20 * series.size() + 4
       << "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"#999\"/>\n";
    for (const auto& s : series) {
        os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 30 << "\" y2=\"" << ly << "\" stroke=\""
           << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        os << "<text x=\"" << lx + 38 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
        ly += 20;
    }
    os << "</svg>\n";
    return os.str();
}

void save_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    os << render_svg(spec, series);
}

}  // namespace fetx
