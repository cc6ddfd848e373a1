#ifndef PDBENCH_SVG_HPP
#define PDBENCH_SVG_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace pdbench {

struct SvgSeries {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points; ///< sorted by x for a line chart
};

/// Minimal self-contained SVG line chart (axes, ticks, legend, polylines).
void write_svg_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<SvgSeries>& series);

} // namespace pdbench

#endif
