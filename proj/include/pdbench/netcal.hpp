#ifndef PDBENCH_NETCAL_HPP
#define PDBENCH_NETCAL_HPP

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdbench/phasor.hpp"

namespace pdbench {

/// Transmission parameter as magnitude (dB) / phase (degrees).
struct PolarDb {
    double mag_db = 0.0;
    double phase_deg = 0.0;

    std::complex<double> to_complex() const;
    double mag_linear() const;
};

/// Transmission parameters of the 5-port connection block at one frequency:
/// generator ports 1/2 to the combiner port 3 (s31, s32) and to the detector
/// ports a/b (sa1, sb2). Passive: all magnitudes <= 0 dB.
struct SParamSet {
    double freq_ghz = 0.0;
    PolarDb s31, s32, sa1, sb2;
};

/// Generator corrections derived from one SParamSet. dp_mc_db is the power
/// adjustment applied to the primary generator (the negative of the secondary
/// amplitude correction), dtheta_sc_deg the phase adjustment applied to the
/// secondary, and dp_db the power offset between the combiner calibration
/// plane and the detector port (|sa1|).
struct CorrectionSet {
    double freq_ghz = 0.0;
    double dp_mc_db = 0.0;
    double dtheta_sc_deg = 0.0; ///< (-180, 180]
    double dp_db = 0.0;
};

/// Plain-text format, one row per frequency:
///   freq_ghz  s31_db s31_deg  s32_db s32_deg  sa1_db sa1_deg  sb2_db sb2_deg
/// '#' starts a comment. Rows are returned sorted by frequency.
std::vector<SParamSet> load_sparams(std::istream& in);
std::vector<SParamSet> load_sparams_file(const std::string& path);
void write_sparams(std::ostream& out, const std::vector<SParamSet>& sets);

/// Lookup with 1 MHz tolerance; throws UnknownFrequency when absent.
const SParamSet& find_sparams(const std::vector<SParamSet>& sets, double freq_ghz);

CorrectionSet compute_corrections(const SParamSet& sp);

/// Switch positions: state 1 routes generator ports 1,2 to detector ports a,b;
/// state 2 routes both to the combiner (output port 3).
struct Routing {
    int state = 2;
};

Routing switch_route(int state);

/// Result of pushing the two generator waves through the connection block.
/// Only the ports reachable in the given switch state are populated.
struct NetworkOutputs {
    std::optional<Phasor> dut_a;    ///< state 1: port 1 through sa1
    std::optional<Phasor> dut_b;    ///< state 1: port 2 through sb2
    std::optional<Phasor> combiner; ///< state 2: sum of both branches at port 3
};

NetworkOutputs apply_network(const SParamSet& sp, const Routing& route,
                             const Phasor& port1_in, const Phasor& port2_in);

/// Identity network (0 dB, 0 deg on every branch) at the given frequency.
SParamSet identity_network(double freq_ghz);

/// Round-half-to-even at the given number of decimals (instrument-display
/// convention used for the one-decimal correction tables).
double round_half_even(double value, int decimals);

} // namespace pdbench

#endif
