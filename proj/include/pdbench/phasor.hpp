#ifndef PDBENCH_PHASOR_HPP
#define PDBENCH_PHASOR_HPP

#include <complex>
#include <limits>

#include "pdbench/angles.hpp"

namespace pdbench {

/// Complex amplitude in linear volts plus phase in degrees, normalized to
/// [0, 360). The currency of all RF signal math in the bench.
struct Phasor {
    double amplitude_v = 0.0; ///< >= 0
    double phase_deg = 0.0;   ///< [0, 360)

    Phasor() = default;
    Phasor(double amplitude, double phase);

    std::complex<double> to_complex() const;
    static Phasor from_complex(std::complex<double> z);
};

/// Amplitude/phase deviation of the secondary source relative to the primary:
/// s is the amplitude ratio in dB, delta_theta_s the phase deviation in degrees.
struct DeviationPair {
    double s_db = 0.0;
    double delta_theta_s_deg = 0.0; ///< (-180, 180]
};

/// Power level in dBm. -inf is a legal value and stands for a perfect null.
struct PowerDbm {
    double value = -std::numeric_limits<double>::infinity();

    bool is_neg_inf() const { return std::isinf(value) && value < 0.0; }

    double linear_mw() const;
    static PowerDbm from_linear_mw(double mw);

    /// Power of a sinusoid with the given peak amplitude into the bench's
    /// reference load (the same convention dbm_to_amplitude uses).
    static PowerDbm from_amplitude(double amplitude_v);
};

/// Peak amplitude in volts of a generator set to `a` dBm: 10^(a/20 - 1/2).
double dbm_to_amplitude(double a_dbm);

/// Inverse of dbm_to_amplitude; amplitude 0 maps to -inf dBm.
double amplitude_to_dbm(double amplitude_v);

/// Vector sum of the two generator signals at the combiner input: the primary
/// contributes amplitude A at angle theta_m, the secondary A+dA at angle
/// delta_theta_s. At theta_m in {0, 180} this is the textbook max/null case.
Phasor combiner_output(double a_dbm, const DeviationPair& dev, double theta_m_deg);

/// Ratio in dB between the null (theta_m = 180) and maximum (theta_m = 0)
/// combiner output power for the given deviations; -inf for a perfect null.
double null_ratio_db(double a_dbm, const DeviationPair& dev);

/// Inverts null_ratio_db in delta_theta_s for a fixed amplitude deviation:
/// given a measured null depth r (dB, negative) returns the phase deviation
/// bound in degrees. Independent of the drive level. Throws NoSolution when
/// r is below what the amplitude deviation alone already produces, or above
/// the value attainable within [0, 90] degrees.
double phase_error_bound(double r_db, double s_db);

} // namespace pdbench

#endif
