#ifndef PDBENCH_CAMPAIGN_HPP
#define PDBENCH_CAMPAIGN_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "pdbench/config.hpp"
#include "pdbench/curve_ref.hpp"
#include "pdbench/procedure.hpp"

namespace pdbench {

/// Output of the offline referencing pipeline for one frequency point.
struct ReferencingOutcome {
    PhaseVector pv_i, pv_q;
    AnchorSolution anchor_i, anchor_q;
    ReferencedCurve ref_i, ref_q;
    double shift_deg = 0.0;
};

/// Oversample, estimate the period, resolve both anchors, restore both curves
/// and compute the I/Q shift. The same path serves the simulator and the
/// offline `reference` command.
ReferencingOutcome reference_curves(const DetectorCurve& curve_i, const DetectorCurve& curve_q,
                                    const ReferenceVoltages& refs, int oversample_factor = 4,
                                    const AnchorOptions& opts = {});

/// One frequency point of a campaign: either a full result or an error note.
struct MeasurementRecord {
    double freq_ghz = 0.0;
    bool ok = false;
    std::string error;

    ProcedureReport proc;
    ReferencingOutcome ref;
    double shift_deg = 0.0;
    bool within_spec = false;
    double ground_truth_deg = 0.0;
};

struct CampaignReport {
    std::string config_hash;
    unsigned long long seed = 0;
    std::vector<MeasurementRecord> records;

    bool all_ok() const;
};

/// Runs the procedure plus referencing at every configured frequency; one
/// failing point is recorded and does not abort the rest.
CampaignReport run_campaign(const CampaignConfig& cfg);

nlohmann::ordered_json report_to_json(const CampaignReport& report, bool include_timestamp);

/// Writes report.json, per-curve CSVs, reference-voltage files and the
/// per-frequency SVG overlays into cfg.output_dir.
void write_campaign_outputs(const CampaignConfig& cfg, const CampaignReport& report,
                            bool include_timestamp = true);

// ---------------------------------------------------------------------------
// Reference datasets recorded during the original bench characterization,
// kept as data files so the comparison tables read them instead of baking
// constants into code.

struct CombinerRefRow {
    int case_no = 0;
    double a_dbm = 0.0, s_db = 0.0, dtheta_deg = 0.0;
    double sa_max_dbm = 0.0, sa_min_dbm = 0.0, ratio_db = 0.0;
    std::string anomaly; ///< "-", "ratio" or "min": cell inconsistent with its own row
};
std::vector<CombinerRefRow> load_combiner_reference_table(const std::string& path);

struct CorrectionRefRow {
    double freq_ghz = 0.0;
    double dp_mc_db = 0.0;
    double dtheta_sc_deg = 0.0;
    std::string anomaly; ///< "-", "value" or "sign"
};
std::vector<CorrectionRefRow> load_correction_reference_table(const std::string& path);

struct ProcessRefRow {
    double freq_ghz = 0.0;
    double vd_max_v = 0.0, vd_min_v = 0.0;
    double dp_m_null_db = 0.0, p_sum_dbm = 0.0;
    double dp_mc_db = 0.0, dtheta_sc_deg = 0.0, dp_db = 0.0;
};
std::vector<ProcessRefRow> load_process_reference_table(const std::string& path);

struct IqRefRow {
    double freq_ghz = 0.0;
    int y_q = 0;
    double theta_q_deg = 0.0, v_q_v = 0.0;
    int y_i = 0;
    double theta_i_deg = 0.0, v_i_v = 0.0;
    double shift_deg = 0.0;
    bool within = false;
};
std::vector<IqRefRow> load_iq_reference_table(const std::string& path);

} // namespace pdbench

#endif
