#include "pdbench/phasor.hpp"

#include <cmath>

#include "pdbench/errors.hpp"

namespace pdbench {

Phasor::Phasor(double amplitude, double phase)
    : amplitude_v(amplitude), phase_deg(wrap360(phase))
{
}

std::complex<double> Phasor::to_complex() const
{
    return std::polar(amplitude_v, deg_to_rad(phase_deg));
}

Phasor Phasor::from_complex(std::complex<double> z)
{
    return Phasor(std::abs(z), rad_to_deg(std::arg(z)));
}

double PowerDbm::linear_mw() const
{
    if (is_neg_inf())
        return 0.0;
    return std::pow(10.0, value / 10.0);
}

PowerDbm PowerDbm::from_linear_mw(double mw)
{
    if (mw <= 0.0)
        return PowerDbm{};
    return PowerDbm{10.0 * std::log10(mw)};
}

PowerDbm PowerDbm::from_amplitude(double amplitude_v)
{
    return PowerDbm{amplitude_to_dbm(amplitude_v)};
}

double dbm_to_amplitude(double a_dbm)
{
    return std::pow(10.0, a_dbm / 20.0 - 0.5);
}

double amplitude_to_dbm(double amplitude_v)
{
    if (amplitude_v <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return 20.0 * (std::log10(amplitude_v) + 0.5);
}

Phasor combiner_output(double a_dbm, const DeviationPair& dev, double theta_m_deg)
{
    const double a = dbm_to_amplitude(a_dbm);
    const double secondary = a * std::pow(10.0, dev.s_db / 20.0);
    const std::complex<double> sum = std::polar(a, deg_to_rad(theta_m_deg)) +
                                     std::polar(secondary, deg_to_rad(dev.delta_theta_s_deg));
    return Phasor::from_complex(sum);
}

double null_ratio_db(double a_dbm, const DeviationPair& dev)
{
    const double a = dbm_to_amplitude(a_dbm);
    const double da = (std::pow(10.0, dev.s_db / 20.0) - 1.0) * a;
    const double c = cos_deg(dev.delta_theta_s_deg);
    const double cross = 2.0 * a * (a + da);
    const double num = da * da + cross * (1.0 - c);
    const double den = da * da + cross * (1.0 + c);
    if (num <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(num / den);
}

double phase_error_bound(double r_db, double s_db)
{
    // The ratio is independent of the drive level; evaluate at 0 dBm.
    auto ratio_at = [s_db](double dtheta) {
        return null_ratio_db(0.0, DeviationPair{s_db, dtheta});
    };

    const double floor_db = ratio_at(0.0);
    const double ceil_db = ratio_at(90.0);
    if (r_db < floor_db)
        throw NoSolution("measured null ratio is below the amplitude-deviation floor");
    if (r_db > ceil_db)
        throw NoSolution("null ratio not attainable within [0, 90] degrees");
    if (std::isinf(r_db))
        return 0.0;

    // Monotone increasing on [0, 90]; bisect well past 1e-9 degrees.
    double lo = 0.0, hi = 90.0;
    for (int i = 0; i < 200 && (hi - lo) > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (ratio_at(mid) < r_db)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace pdbench
