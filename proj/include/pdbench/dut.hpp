#ifndef PDBENCH_DUT_HPP
#define PDBENCH_DUT_HPP

#include <vector>

#include "pdbench/phasor.hpp"

namespace pdbench {

/// Which product the detector multiplies: direct x direct or shifted x direct.
enum class DetectorMode { IxI, QxI };

const char* to_string(DetectorMode mode);

/// Per-frequency description of the switched dual-multiplier detector.
/// hybrid_shift_deg is 90 plus the device's quadrature deviation and is the
/// ground truth the whole pipeline has to recover. The optional harmonic
/// fractions make the response non-sinusoidal.
struct DutEntry {
    double freq_ghz = 0.0;
    double hybrid_shift_deg = 90.0; ///< (0, 180)
    double gain_i = 1.0;            ///< volts per unit product, > 0
    double gain_q = 1.0;
    double offset_i_v = 0.0;
    double offset_q_v = 0.0;
    double harmonic2 = 0.0; ///< fraction of the fundamental response
    double harmonic3 = 0.0;
};

struct DutModel {
    std::vector<DutEntry> entries;

    /// Lookup with 1 MHz tolerance; throws UnknownFrequency.
    const DutEntry& at(double freq_ghz) const;
};

/// Acceptance half-width around quadrature: the detector passes at a given
/// frequency when its I/Q shift lies in [90 - beta_max, 90 + beta_max].
struct QuadratureSpec {
    double beta_max_deg = 40.0; ///< (0, 90)
};

/// Low-frequency detector output for the given inputs. The phase difference
/// is taken primary minus secondary (input_b minus input_a).
double detect(const DutModel& dut, double freq_ghz, const Phasor& input_a,
              const Phasor& input_b, DetectorMode mode);

/// The I/Q phase shift the pipeline must recover at this frequency.
double ground_truth_shift(const DutModel& dut, double freq_ghz);

/// Closed-interval quadrature test; shift is normalized to [0, 360) first.
bool quadrature_check(double shift_deg, const QuadratureSpec& spec);

} // namespace pdbench

#endif
