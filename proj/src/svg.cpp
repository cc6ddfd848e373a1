#include "pdbench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace pdbench {

namespace {

constexpr double kWidth = 820.0;
constexpr double kHeight = 420.0;
constexpr double kMarginL = 64.0;
constexpr double kMarginR = 24.0;
constexpr double kMarginT = 36.0;
constexpr double kMarginB = 48.0;

double nice_step(double range)
{
    if (range <= 0.0)
        return 1.0;
    const double raw = range / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    double step = 10.0;
    if (norm <= 1.0)
        step = 1.0;
    else if (norm <= 2.0)
        step = 2.0;
    else if (norm <= 5.0)
        step = 5.0;
    return step * mag;
}

} // namespace

void write_svg_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<SvgSeries>& series)
{
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!(x_min < x_max)) {
        x_min = 0.0;
        x_max = 1.0;
    }
    if (!(y_min < y_max)) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double plot_w = kWidth - kMarginL - kMarginR;
    const double plot_h = kHeight - kMarginT - kMarginB;
    auto px = [&](double x) { return kMarginL + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kMarginT + (y_max - y) / (y_max - y_min) * plot_h; };

    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\" "
        << "font-family=\"sans-serif\">" << title << "</text>\n";

    // Grid and ticks.
    const double xs = nice_step(x_max - x_min);
    const double ys = nice_step(y_max - y_min);
    out << "<g font-size=\"11\" font-family=\"sans-serif\" fill=\"#444\">\n";
    for (double x = std::ceil(x_min / xs) * xs; x <= x_max + 1e-9; x += xs) {
        out << "<line x1=\"" << px(x) << "\" y1=\"" << py(y_min) << "\" x2=\"" << px(x)
            << "\" y2=\"" << py(y_max) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << px(x) << "\" y=\"" << kHeight - kMarginB + 16
            << "\" text-anchor=\"middle\">" << x << "</text>\n";
    }
    for (double y = std::ceil(y_min / ys) * ys; y <= y_max + 1e-9; y += ys) {
        out << "<line x1=\"" << px(x_min) << "\" y1=\"" << py(y) << "\" x2=\"" << px(x_max)
            << "\" y2=\"" << py(y) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << py(y) + 4
            << "\" text-anchor=\"end\">" << y << "</text>\n";
    }
    out << "</g>\n";

    out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << kMarginL + plot_w / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << kMarginT + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
        << "transform=\"rotate(-90 16 " << kMarginT + plot_h / 2 << ")\">" << y_label
        << "</text>\n";

    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\" points=\"";
        for (const auto& [x, y] : s.points)
            out << px(x) << ',' << py(y) << ' ';
        out << "\"/>\n";
    }

    double ly = kMarginT + 14.0;
    for (const auto& s : series) {
        out << "<line x1=\"" << kMarginL + 12 << "\" y1=\"" << ly << "\" x2=\"" << kMarginL + 40
            << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kMarginL + 46 << "\" y=\"" << ly + 4
            << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.name << "</text>\n";
        ly += 18.0;
    }
    out << "</svg>\n";
}

} // namespace pdbench
