#include "pdbench/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "pdbench/csvio.hpp"
#include "pdbench/errors.hpp"
#include "pdbench/svg.hpp"

namespace pdbench {

ReferencingOutcome reference_curves(const DetectorCurve& curve_i, const DetectorCurve& curve_q,
                                    const ReferenceVoltages& refs, int oversample_factor,
                                    const AnchorOptions& opts)
{
    for (const DetectorCurve* c : {&curve_i, &curve_q}) {
        const double span = static_cast<double>(c->codes.size()) / c->sample_rate_hz * c->beat_hz;
        if (span <= 1.0) {
            std::ostringstream msg;
            msg << to_string(c->mode) << " curve spans " << span
                << " beat periods; need more than one";
            throw ConfigError(msg.str());
        }
    }

    ReferencingOutcome out;

    const auto vi = curve_i.volts();
    const auto vq = curve_q.volts();
    const auto osi = oversample(vi, oversample_factor);
    const auto osq = oversample(vq, oversample_factor);

    out.pv_i = estimate_period(osi, opts);
    out.pv_q = estimate_period(osq, opts);

    out.anchor_i = resolve_anchor(osi, out.pv_i, refs.vi_180, refs.vi_90, opts);
    out.anchor_q = resolve_anchor(osq, out.pv_q, refs.vq_180, refs.vq_90, opts);

    out.ref_i = restore_curve(osi, out.pv_i, out.anchor_i, DetectorMode::IxI);
    out.ref_q = restore_curve(osq, out.pv_q, out.anchor_q, DetectorMode::QxI);

    out.shift_deg = iq_phase_shift(out.ref_i, out.ref_q, opts.min_fundamental_v);
    return out;
}

namespace {

BenchConfig make_bench_config(const CampaignConfig& cfg, double freq_ghz)
{
    BenchConfig b = cfg.bench;
    b.freq_ghz = freq_ghz;
    b.network.reset();
    if (!cfg.sparams.empty())
        b.network = find_sparams(cfg.sparams, freq_ghz);
    return b;
}

MeasurementRecord run_point_at(const CampaignConfig& cfg, double freq_ghz)
{
    MeasurementRecord rec;
    rec.freq_ghz = freq_ghz;
    try {
        BenchConfig bc = make_bench_config(cfg, freq_ghz);
        bc.dut.at(freq_ghz); // fail early when the detector model lacks the point

        CorrectionSet corr;
        corr.freq_ghz = freq_ghz;
        if (bc.network)
            corr = compute_corrections(*bc.network);

        Bench bench(bc);
        ProcedureEngine engine(bench, cfg.procedure, corr);
        rec.proc = engine.run_point();
        rec.ref = reference_curves(rec.proc.curve_i, rec.proc.curve_q, rec.proc.refs);
        rec.shift_deg = rec.ref.shift_deg;
        rec.within_spec = quadrature_check(rec.shift_deg, cfg.quad);
        rec.ground_truth_deg = ground_truth_shift(bc.dut, freq_ghz);
        rec.ok = true;
    } catch (const std::exception& err) {
        rec.ok = false;
        rec.error = err.what();
    }
    return rec;
}

} // namespace

bool CampaignReport::all_ok() const
{
    for (const auto& r : records)
        if (!r.ok)
            return false;
    return !records.empty();
}

CampaignReport run_campaign(const CampaignConfig& cfg)
{
    CampaignReport report;
    report.config_hash = config_hash(cfg.source_text);
    report.seed = cfg.seed;
    report.records.resize(cfg.frequencies_ghz.size());

    const int workers = std::max(1, std::min<int>(cfg.parallel,
                                                  static_cast<int>(cfg.frequencies_ghz.size())));
    if (workers == 1) {
        for (size_t i = 0; i < cfg.frequencies_ghz.size(); ++i)
            report.records[i] = run_point_at(cfg, cfg.frequencies_ghz[i]);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= cfg.frequencies_ghz.size())
                        return;
                    report.records[i] = run_point_at(cfg, cfg.frequencies_ghz[i]);
                }
            });
        }
        for (auto& t : pool)
            t.join();
    }
    return report;
}

namespace {

nlohmann::ordered_json anchor_json(const AnchorSolution& a)
{
    nlohmann::ordered_json j;
    j["y"] = a.y;
    j["theta_ref_deg"] = a.theta_ref_deg;
    j["v_ref_v"] = a.v_ref_v;
    j["slope"] = a.slope;
    j["candidates_deg"] = {a.candidates_deg[0], a.candidates_deg[1]};
    j["other_crossings_deg"] = {a.other_crossings_deg[0], a.other_crossings_deg[1]};
    j["discriminants_deg"] = {a.discriminants_deg[0], a.discriminants_deg[1]};
    return j;
}

std::string freq_tag(double freq_ghz)
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << freq_ghz << "GHz";
    return out.str();
}

} // namespace

nlohmann::ordered_json report_to_json(const CampaignReport& report, bool include_timestamp)
{
    nlohmann::ordered_json j;
    j["provenance"]["config_hash"] = report.config_hash;
    j["provenance"]["seed"] = report.seed;
    if (include_timestamp) {
        const auto now = std::chrono::system_clock::now();
        j["provenance"]["timestamp"] =
            std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    }

    j["points"] = nlohmann::ordered_json::array();
    for (const auto& r : report.records) {
        nlohmann::ordered_json p;
        p["freq_ghz"] = r.freq_ghz;
        p["status"] = r.ok ? "ok" : "error";
        if (!r.ok) {
            p["error"] = r.error;
            j["points"].push_back(p);
            continue;
        }
        p["null"] = {{"theta_s_ref_deg", r.proc.null.theta_s_ref_deg},
                     {"dp_m_null_db", r.proc.null.dp_m_null_db},
                     {"p_sum_dbm", r.proc.null.p_sum_dbm},
                     {"line_ref_dbm", r.proc.null.line_ref_dbm},
                     {"p_null_dbm", r.proc.null.p_null_dbm}};
        p["refs"] = {{"vi_180", r.proc.refs.vi_180},
                     {"vi_90", r.proc.refs.vi_90},
                     {"vq_90", r.proc.refs.vq_90},
                     {"vq_180", r.proc.refs.vq_180},
                     {"acquired_at_s", r.proc.refs.acquired_at_s},
                     {"valid", r.proc.refs.valid}};
        p["retries"] = r.proc.retries;
        p["error_budget_deg"] = r.proc.error_budget_deg;
        p["window_entry_s"] = r.proc.window_entry_s;
        p["anchors"]["IxI"] = anchor_json(r.ref.anchor_i);
        p["anchors"]["QxI"] = anchor_json(r.ref.anchor_q);
        p["period_samples"]["IxI"] = r.ref.pv_i.period_samples;
        p["period_samples"]["QxI"] = r.ref.pv_q.period_samples;
        p["iq_shift_deg"] = r.shift_deg;
        p["within_spec"] = r.within_spec;
        p["sim_truth"]["ground_truth_shift_deg"] = r.ground_truth_deg;
        p["sim_truth"]["block"] = nlohmann::ordered_json::array();
        for (const auto& t : r.proc.truth) {
            p["sim_truth"]["block"].push_back({{"label", t.label},
                                               {"t_s", t.t_s},
                                               {"null_deviation_deg", t.null_deviation_deg},
                                               {"dut_delta_error_deg", t.dut_delta_error_deg}});
        }
        j["points"].push_back(p);
    }

    j["summary"] = nlohmann::ordered_json::array();
    for (const auto& r : report.records) {
        nlohmann::ordered_json s;
        s["freq_ghz"] = r.freq_ghz;
        if (r.ok) {
            s["iq_shift_deg"] = r.shift_deg;
            s["verdict"] = r.within_spec ? "YES" : "NO";
        } else {
            s["verdict"] = "ERROR";
        }
        j["summary"].push_back(s);
    }
    return j;
}

void write_campaign_outputs(const CampaignConfig& cfg, const CampaignReport& report,
                            bool include_timestamp)
{
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    {
        std::ofstream out(cfg.output_dir + "/report.json");
        out << report_to_json(report, include_timestamp).dump(2) << '\n';
    }

    for (const auto& r : report.records) {
        if (!r.ok)
            continue;
        const std::string tag = freq_tag(r.freq_ghz);
        {
            std::ofstream out(cfg.output_dir + "/curve_" + tag + "_ixi.csv");
            write_curve_csv(out, r.proc.curve_i);
        }
        {
            std::ofstream out(cfg.output_dir + "/curve_" + tag + "_qxi.csv");
            write_curve_csv(out, r.proc.curve_q);
        }
        {
            std::ofstream out(cfg.output_dir + "/refs_" + tag + ".txt");
            write_refs(out, r.proc.refs, r.freq_ghz);
        }
        {
            auto sorted_points = [](const ReferencedCurve& c) {
                std::vector<std::pair<double, double>> pts;
                pts.reserve(c.theta_m_deg.size());
                for (size_t i = 0; i < c.theta_m_deg.size(); ++i)
                    pts.emplace_back(c.theta_m_deg[i], c.volts[i]);
                std::sort(pts.begin(), pts.end());
                return pts;
            };
            std::ofstream out(cfg.output_dir + "/plot_" + tag + ".svg");
            std::ostringstream title;
            title << "Referenced detector curves, f = " << std::fixed << std::setprecision(3)
                  << r.freq_ghz << " GHz (shift " << std::setprecision(2) << r.shift_deg << " deg)";
            write_svg_chart(out, title.str(), "theta_m (deg)", "V_d (V)",
                            {SvgSeries{"IxI", "#1f77b4", sorted_points(r.ref.ref_i)},
                             SvgSeries{"QxI", "#d62728", sorted_points(r.ref.ref_q)}});
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

std::ifstream open_or_throw(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open data file: " + path);
    return in;
}

double parse_maybe_inf(const std::string& tok, int line_no)
{
    if (tok == "-inf")
        return -std::numeric_limits<double>::infinity();
    try {
        return std::stod(tok);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number " + tok);
    }
}

} // namespace

std::vector<CombinerRefRow> load_combiner_reference_table(const std::string& path)
{
    auto in = open_or_throw(path);
    std::vector<CombinerRefRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream row(line);
        CombinerRefRow r;
        std::string smax, smin, srat;
        if (!(row >> r.case_no))
            continue;
        if (!(row >> r.a_dbm >> r.s_db >> r.dtheta_deg >> smax >> smin >> srat >> r.anomaly))
            throw ParseError("line " + std::to_string(line_no) + ": expected 8 columns");
        r.sa_max_dbm = parse_maybe_inf(smax, line_no);
        r.sa_min_dbm = parse_maybe_inf(smin, line_no);
        r.ratio_db = parse_maybe_inf(srat, line_no);
        rows.push_back(r);
    }
    if (rows.empty())
        throw ParseError("no rows in " + path);
    return rows;
}

std::vector<CorrectionRefRow> load_correction_reference_table(const std::string& path)
{
    auto in = open_or_throw(path);
    std::vector<CorrectionRefRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream row(line);
        CorrectionRefRow r;
        if (!(row >> r.freq_ghz))
            continue;
        if (!(row >> r.dp_mc_db >> r.dtheta_sc_deg >> r.anomaly))
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 columns");
        rows.push_back(r);
    }
    if (rows.empty())
        throw ParseError("no rows in " + path);
    return rows;
}

std::vector<ProcessRefRow> load_process_reference_table(const std::string& path)
{
    auto in = open_or_throw(path);
    std::vector<ProcessRefRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream row(line);
        ProcessRefRow r;
        if (!(row >> r.freq_ghz))
            continue;
        if (!(row >> r.vd_max_v >> r.vd_min_v >> r.dp_m_null_db >> r.p_sum_dbm >> r.dp_mc_db >>
              r.dtheta_sc_deg >> r.dp_db))
            throw ParseError("line " + std::to_string(line_no) + ": expected 8 columns");
        rows.push_back(r);
    }
    if (rows.empty())
        throw ParseError("no rows in " + path);
    return rows;
}

std::vector<IqRefRow> load_iq_reference_table(const std::string& path)
{
    auto in = open_or_throw(path);
    std::vector<IqRefRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream row(line);
        IqRefRow r;
        std::string within;
        if (!(row >> r.freq_ghz))
            continue;
        if (!(row >> r.y_q >> r.theta_q_deg >> r.v_q_v >> r.y_i >> r.theta_i_deg >> r.v_i_v >>
              r.shift_deg >> within))
            throw ParseError("line " + std::to_string(line_no) + ": expected 9 columns");
        r.within = (within == "YES" || within == "yes" || within == "1");
        rows.push_back(r);
    }
    if (rows.empty())
        throw ParseError("no rows in " + path);
    return rows;
}

} // namespace pdbench
