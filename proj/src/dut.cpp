#include "pdbench/dut.hpp"

#include <cmath>
#include <sstream>

#include "pdbench/errors.hpp"

namespace pdbench {

const char* to_string(DetectorMode mode)
{
    return mode == DetectorMode::IxI ? "IxI" : "QxI";
}

const DutEntry& DutModel::at(double freq_ghz) const
{
    for (const auto& e : entries) {
        if (std::fabs(e.freq_ghz - freq_ghz) < 1e-3)
            return e;
    }
    std::ostringstream msg;
    msg << "no detector model entry at " << freq_ghz << " GHz";
    throw UnknownFrequency(msg.str());
}

double detect(const DutModel& dut, double freq_ghz, const Phasor& input_a,
              const Phasor& input_b, DetectorMode mode)
{
    const DutEntry& e = dut.at(freq_ghz);
    const double delta = input_b.phase_deg - input_a.phase_deg;
    const double x = (mode == DetectorMode::QxI) ? delta - e.hybrid_shift_deg : delta;
    const double base = cos_deg(x) + e.harmonic2 * cos_deg(2.0 * x) + e.harmonic3 * cos_deg(3.0 * x);
    const double gain = (mode == DetectorMode::QxI) ? e.gain_q : e.gain_i;
    const double offset = (mode == DetectorMode::QxI) ? e.offset_q_v : e.offset_i_v;
    return gain * (input_a.amplitude_v * input_b.amplitude_v / 2.0) * base + offset;
}

double ground_truth_shift(const DutModel& dut, double freq_ghz)
{
    return dut.at(freq_ghz).hybrid_shift_deg;
}

bool quadrature_check(double shift_deg, const QuadratureSpec& spec)
{
    const double s = wrap360(shift_deg);
    return s >= 90.0 - spec.beta_max_deg && s <= 90.0 + spec.beta_max_deg;
}

} // namespace pdbench
