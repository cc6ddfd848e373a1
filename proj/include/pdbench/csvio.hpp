#ifndef PDBENCH_CSVIO_HPP
#define PDBENCH_CSVIO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "pdbench/procedure.hpp"

namespace pdbench {

/// Curve CSV: '#' header lines carry the acquisition metadata, then
/// `sample_index,code,volts` rows. One file may hold several curves, each
/// starting with its own `# mode=` header.
void write_curve_csv(std::ostream& out, const DetectorCurve& curve);
std::vector<DetectorCurve> read_curves_csv(std::istream& in);
std::vector<DetectorCurve> read_curves_csv_file(const std::string& path);

/// Reference-voltage file: four labeled values plus metadata, key = value.
void write_refs(std::ostream& out, const ReferenceVoltages& refs, double freq_ghz);
std::pair<ReferenceVoltages, double> read_refs(std::istream& in);
std::pair<ReferenceVoltages, double> read_refs_file(const std::string& path);

} // namespace pdbench

#endif
