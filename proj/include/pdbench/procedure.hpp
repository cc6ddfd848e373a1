#ifndef PDBENCH_PROCEDURE_HPP
#define PDBENCH_PROCEDURE_HPP

#include <utility>
#include <vector>

#include "pdbench/bench.hpp"
#include "pdbench/curve_ref.hpp"
#include "pdbench/netcal.hpp"

namespace pdbench {

struct ProcedureConfig {
    double line_offset_db = 41.0; ///< reference line below P_SUM (41 -> +-1 deg, 47 -> +-0.5)
    int max_retries = 10;
    bool skip_network_corrections = false;
    double beat_offset_hz = 11.0;       ///< deliberate trim during curve acquisition
    double gain_adjust_trim_hz = 1000.0; ///< trim used while setting the VAC gain
    double await_poll_s = 0.25;
    double await_horizon_s = 3600.0;
    /// The null is declared unreachable when its depth stays this far short of
    /// the line offset. Loose enough that a drifting target during the search
    /// is not mistaken for an amplitude floor.
    double null_floor_margin_db = 20.0;
    bool auto_vac = true;
    double vac_target_low_v = 0.25;
    double vac_target_high_v = 4.75;
    double null_phase_tol_deg = 0.01; ///< generator entry granularity
    double null_power_tol_db = 0.01;
};

struct NullResult {
    double theta_s_ref_deg = 0.0; ///< working secondary phase after the null/line adjustment
    double dp_m_null_db = 0.0;    ///< primary power change that balanced the null
    double p_sum_dbm = 0.0;       ///< maximum combiner power (theta_m = 0)
    double line_ref_dbm = 0.0;    ///< p_sum - line_offset
    double p_null_dbm = 0.0;      ///< power captured at the refined null
};

struct ReferenceVoltages {
    double vi_180 = 0.0;
    double vi_90 = 0.0;
    double vq_90 = 0.0;
    double vq_180 = 0.0;
    double acquired_at_s = 0.0;
    bool valid = false;
};

struct DetectorCurve {
    DetectorMode mode = DetectorMode::IxI;
    std::vector<int> codes;
    double sample_rate_hz = 2800.0;
    double beat_hz = 11.0;
    double freq_ghz = 0.0;
    double full_scale_v = 5.0;
    int bits = 10;
    bool clipped = false;
    double start_time_s = 0.0;

    std::vector<double> volts() const;
};

/// Simulation-truth snapshot taken at key instants of the reference block;
/// used for diagnostics and for checking the drift-window guarantee.
struct CaptureTruth {
    std::string label;
    double t_s = 0.0;
    double null_deviation_deg = 0.0;  ///< deviation from antiphase at the combiner
    double dut_delta_error_deg = 0.0; ///< detector input phase error vs the commanded angle
};

struct ProcedureReport {
    double freq_ghz = 0.0;
    NullResult null;
    ReferenceVoltages refs;
    DetectorCurve curve_i;
    DetectorCurve curve_q;
    int retries = 0;
    double error_budget_deg = 0.0;
    double window_entry_s = 0.0;
    std::vector<CaptureTruth> truth;
};

/// Drives one bench through the combined calibration/measurement sequence:
/// null search, reference line, drift-window gating, the timed reference
/// block with post-check and retry, and the beat-offset curve acquisition.
class ProcedureEngine {
public:
    ProcedureEngine(Bench& bench, ProcedureConfig cfg, CorrectionSet corrections);

    /// Adjusts the secondary phase and primary power for minimum combiner
    /// power, measures the maximum, and sets the reference line.
    NullResult null_search();

    /// Positions the phase so the drift approaches the null and returns the
    /// time at which the SA power crosses below the reference line while
    /// decreasing. Updates the working phase inside `null`.
    double await_drift_window(NullResult& null);

    /// The nine-step timed block capturing the four reference voltages.
    ReferenceVoltages reference_acquisition(const NullResult& null);

    /// True when the SA power is still under the reference line.
    bool post_check(const NullResult& null);

    /// Captures the two beat curves with the deliberate frequency offset.
    std::pair<DetectorCurve, DetectorCurve> curve_acquisition(const NullResult& null);

    /// Main-sequence head: route to the detector at a small trim and set the
    /// VAC so the curves fill the converter range without clipping.
    void prepare_vac();

    /// Full sequence with the retry loop; throws NullNotFound, AwaitTimeout,
    /// RetriesExhausted or ClippedCurve.
    ProcedureReport run_point();

    double error_budget_deg() const;
    const std::vector<CaptureTruth>& truth() const { return truth_; }

private:
    double read_power();
    double probe_theta(double theta_deg);
    double probe_power(double dbm);
    void record_truth(const char* label);
    void apply_corrections();
    void restore_corrections();

    Bench& bench_;
    ProcedureConfig cfg_;
    CorrectionSet corr_;
    double base_power_m_ = 0.0;
    std::vector<CaptureTruth> truth_;
};

} // namespace pdbench

#endif
