#ifndef PDBENCH_CURVE_REF_HPP
#define PDBENCH_CURVE_REF_HPP

#include <array>
#include <span>
#include <vector>

#include "pdbench/dut.hpp"

namespace pdbench {

/// Fractional period (in samples) of an acquired buffer plus the linear phase
/// assigned to every sample: 0 at the buffer start, 360 per period.
struct PhaseVector {
    double period_samples = 0.0;
    std::vector<double> phases_deg;
};

/// Resolution of a reference voltage against the acquired curve: which anchor
/// angle was used (90 or 180), the acquisition phase where it sits, the two
/// crossing candidates the ambiguity was decided between, and the crossings
/// of the companion reference used for the decision.
struct AnchorSolution {
    int y = 180;                   ///< 90 or 180
    double theta_ref_deg = 0.0;    ///< acquisition phase of the anchor
    double v_ref_v = 0.0;          ///< reference voltage used
    int slope = -1;                ///< crossing direction at the anchor: +1 rising, -1 falling
    std::array<double, 2> candidates_deg{0.0, 0.0};
    std::array<double, 2> other_crossings_deg{0.0, 0.0};
    std::array<double, 2> discriminants_deg{0.0, 0.0};
};

/// A detector curve moved onto the input-phase axis. Sample values are the
/// original (oversampled) voltages; only the axis changes.
struct ReferencedCurve {
    DetectorMode mode = DetectorMode::IxI;
    std::vector<double> theta_m_deg;
    std::vector<double> volts;
    AnchorSolution anchor;
};

struct AnchorOptions {
    double tie_threshold_deg = 1.0;
    double min_autocorr = 0.55;
    double min_fundamental_v = 0.01;
};

/// Band-limited interpolation by the given integer factor (windowed sinc);
/// original samples are preserved exactly at stride positions.
std::vector<double> oversample(std::span<const double> samples, int factor = 4);

/// Fractional period via the normalized autocorrelation peak, refined by
/// quadratic interpolation and a least-squares self-match polish. Requires
/// the buffer to span more than one (and at most about four) periods.
PhaseVector estimate_period(std::span<const double> samples, const AnchorOptions& opts = {});

/// Implements the reference-crossing resolution: pick the anchor whose
/// voltage is nearer the curve middle value, locate its slope-consistent
/// crossings, and disambiguate them with the companion reference.
AnchorSolution resolve_anchor(std::span<const double> samples, const PhaseVector& pv,
                              double vx_180, double vx_90, const AnchorOptions& opts = {});

/// Re-axis one period of the buffer so the anchor lands on theta_m = y.
ReferencedCurve restore_curve(std::span<const double> samples, const PhaseVector& pv,
                              const AnchorSolution& anchor, DetectorMode mode);

/// Phase of the fundamental of each referenced curve on its theta_m axis,
/// returned as theta_QxI - theta_IxI wrapped to [0, 360).
double iq_phase_shift(const ReferencedCurve& curve_i, const ReferencedCurve& curve_q,
                      double min_fundamental_v = 0.01);

/// Sub-sample positions where the buffer crosses the given level, with the
/// crossing direction (+1 rising, -1 falling, 0 tangential touch).
struct LevelCrossing {
    double pos_samples = 0.0;
    int direction = 0;
};
std::vector<LevelCrossing> level_crossings(std::span<const double> samples, double level);

} // namespace pdbench

#endif
