#ifndef PDBENCH_ANGLES_HPP
#define PDBENCH_ANGLES_HPP

#include <cmath>

namespace pdbench {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

inline double cos_deg(double deg) { return std::cos(deg_to_rad(deg)); }
inline double sin_deg(double deg) { return std::sin(deg_to_rad(deg)); }

/// Wrap to [0, 360).
inline double wrap360(double deg)
{
    double r = std::fmod(deg, 360.0);
    if (r < 0.0)
        r += 360.0;
    if (r == 360.0) // fmod can yield -0.0 + 360
        r = 0.0;
    return r;
}

/// Wrap to (-180, 180].
inline double wrap180(double deg)
{
    double r = std::fmod(deg + 180.0, 360.0);
    if (r <= 0.0)
        r += 360.0;
    return r - 180.0;
}

/// Absolute angular distance in [0, 180].
inline double angular_distance(double a_deg, double b_deg)
{
    return std::fabs(wrap180(a_deg - b_deg));
}

} // namespace pdbench

#endif
