// Command-line front end for the virtual measurement bench: reproduce the
// built-in reference tables, compute network corrections, run simulated
// campaigns and reference externally recorded curves.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdbench/campaign.hpp"
#include "pdbench/csvio.hpp"
#include "pdbench/errors.hpp"

using namespace pdbench;

namespace {

std::string fmt(double v, int prec)
{
    if (std::isinf(v))
        return v < 0 ? "-inf" : "inf";
    std::ostringstream out;
    out << std::fixed << std::setprecision(prec) << v;
    return out.str();
}

int cmd_table1(const std::string& data_dir, const std::string& json_path)
{
    const auto rows = load_combiner_reference_table(data_dir + "/combiner_reference_table.txt");
    nlohmann::ordered_json jrows = nlohmann::ordered_json::array();

    std::cout << "Combiner null/maximum levels: computed vs recorded\n";
    std::cout << "case    a      s   dtheta |  sa_max          sa_min          ratio\n";
    std::cout << "       dBm    dB     deg  |  comp/rec        comp/rec        comp/rec\n";
    bool any_flag = false;
    for (const auto& r : rows) {
        const DeviationPair dev{r.s_db, r.dtheta_deg};
        const double sa_max = amplitude_to_dbm(combiner_output(r.a_dbm, dev, 0.0).amplitude_v);
        const double sa_min = amplitude_to_dbm(combiner_output(r.a_dbm, dev, 180.0).amplitude_v);
        const double ratio = null_ratio_db(r.a_dbm, dev);

        auto cell = [&](double comp, double rec, const char* which) {
            const bool flagged = r.anomaly == which;
            const double delta = comp - rec;
            std::ostringstream out;
            out << fmt(comp, 2) << '/' << fmt(rec, 2);
            if (std::isinf(comp) && std::isinf(rec))
                out << "        ";
            else
                out << " (" << std::showpos << std::fixed << std::setprecision(2) << delta << ')';
            if (flagged) {
                out << '!';
                any_flag = true;
            }
            return out.str();
        };
        std::cout << std::setw(3) << r.case_no << "  " << std::setw(5) << r.a_dbm << ' '
                  << std::setw(5) << r.s_db << ' ' << std::setw(7) << r.dtheta_deg << " |  "
                  << std::setw(15) << cell(sa_max, r.sa_max_dbm, "max") << ' ' << std::setw(15)
                  << cell(sa_min, r.sa_min_dbm, "min") << ' ' << std::setw(15)
                  << cell(ratio, r.ratio_db, "ratio") << '\n';

        nlohmann::ordered_json j;
        j["case"] = r.case_no;
        j["inputs"] = {{"a_dbm", r.a_dbm}, {"s_db", r.s_db}, {"dtheta_deg", r.dtheta_deg}};
        j["computed"] = {{"sa_max_dbm", sa_max}, {"sa_min_dbm", sa_min}, {"ratio_db", ratio}};
        j["recorded"] = {{"sa_max_dbm", r.sa_max_dbm},
                         {"sa_min_dbm", r.sa_min_dbm},
                         {"ratio_db", r.ratio_db}};
        j["anomaly"] = r.anomaly;
        jrows.push_back(j);
    }
    if (any_flag)
        std::cout << "cells marked ! are recorded values inconsistent with their own row "
                     "(see the data file notes)\n";
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << jrows.dump(2) << '\n';
    }
    return 0;
}

int cmd_corrections(const std::string& sparams_path, const std::string& published_path,
                    const std::string& json_path)
{
    const auto sets = load_sparams_file(sparams_path);
    std::vector<CorrectionRefRow> published;
    if (!published_path.empty())
        published = load_correction_reference_table(published_path);

    nlohmann::ordered_json jrows = nlohmann::ordered_json::array();
    std::cout << "freq   dp_mc    dtheta_sc   dp     (computed";
    if (!published.empty())
        std::cout << "; flag when |computed - recorded phase| > 0.05 deg";
    std::cout << ")\n";
    for (const auto& sp : sets) {
        const CorrectionSet c = compute_corrections(sp);
        std::cout << std::setw(4) << sp.freq_ghz << "  " << std::setw(7) << fmt(c.dp_mc_db, 3)
                  << "  " << std::setw(8) << fmt(c.dtheta_sc_deg, 3) << "  " << std::setw(5)
                  << fmt(round_half_even(c.dp_db, 1), 1);

        nlohmann::ordered_json j;
        j["freq_ghz"] = sp.freq_ghz;
        j["dp_mc_db"] = c.dp_mc_db;
        j["dtheta_sc_deg"] = c.dtheta_sc_deg;
        j["dp_db"] = round_half_even(c.dp_db, 1);
        for (const auto& p : published) {
            if (std::fabs(p.freq_ghz - sp.freq_ghz) < 1e-3) {
                const bool disagree = std::fabs(c.dtheta_sc_deg - p.dtheta_sc_deg) > 0.05;
                std::cout << "   recorded " << fmt(p.dp_mc_db, 3) << " / "
                          << fmt(p.dtheta_sc_deg, 3);
                if (disagree)
                    std::cout << "  << phase disagrees (recorded anomaly: " << p.anomaly << ")";
                j["recorded_dp_mc_db"] = p.dp_mc_db;
                j["recorded_dtheta_sc_deg"] = p.dtheta_sc_deg;
                j["phase_disagrees"] = disagree;
                j["recorded_anomaly"] = p.anomaly;
            }
        }
        std::cout << '\n';
        jrows.push_back(j);
    }
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << jrows.dump(2) << '\n';
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, long long seed,
                 double line_offset, double beta_max, bool skip_netcal, int parallel,
                 bool no_timestamp)
{
    CampaignConfig cfg = load_campaign_config(config_path);
    if (!out_dir.empty())
        cfg.output_dir = out_dir;
    if (seed >= 0)
        cfg.seed = static_cast<unsigned long long>(seed);
    if (line_offset > 0.0)
        cfg.procedure.line_offset_db = line_offset;
    if (beta_max > 0.0)
        cfg.quad.beta_max_deg = beta_max;
    if (skip_netcal)
        cfg.procedure.skip_network_corrections = true;
    if (parallel > 0)
        cfg.parallel = parallel;

    const CampaignReport report = run_campaign(cfg);
    write_campaign_outputs(cfg, report, !no_timestamp);

    std::cout << "freq_ghz  shift_deg   90+-" << cfg.quad.beta_max_deg << "  status\n";
    for (const auto& r : report.records) {
        std::cout << std::setw(7) << r.freq_ghz << "  ";
        if (r.ok) {
            std::cout << std::setw(9) << fmt(r.shift_deg, 3) << "  " << std::setw(6)
                      << (r.within_spec ? "YES" : "NO") << "  ok";
            std::cout << " (retries " << r.proc.retries << ")";
        } else {
            std::cout << std::setw(9) << "-" << "  " << std::setw(6) << "-" << "  error: "
                      << r.error;
        }
        std::cout << '\n';
    }
    std::cout << "outputs written to " << cfg.output_dir << "/\n";
    return report.all_ok() ? 0 : 1;
}

int cmd_reference(const std::vector<std::string>& files, double beta_max,
                  const std::string& json_path)
{
    if (files.size() < 2)
        throw ConfigError("need at least one curve CSV and the reference-voltage file");

    std::vector<DetectorCurve> curves;
    for (size_t i = 0; i + 1 < files.size(); ++i) {
        for (auto& c : read_curves_csv_file(files[i]))
            curves.push_back(std::move(c));
    }
    const auto [refs, freq_ghz] = read_refs_file(files.back());

    const DetectorCurve* ci = nullptr;
    const DetectorCurve* cq = nullptr;
    for (const auto& c : curves) {
        if (c.mode == DetectorMode::IxI)
            ci = &c;
        else
            cq = &c;
    }
    if (ci == nullptr || cq == nullptr)
        throw ConfigError("need one IxI and one QxI curve");

    const ReferencingOutcome out = reference_curves(*ci, *cq, refs);
    const QuadratureSpec spec{beta_max > 0.0 ? beta_max : 40.0};
    const bool within = quadrature_check(out.shift_deg, spec);

    std::cout << "freq    y   theta_ref    v_ref   curve\n";
    auto print_anchor = [&](const AnchorSolution& a, const char* name) {
        std::cout << std::setw(4) << freq_ghz << "  " << std::setw(3) << a.y << "  " << std::setw(9)
                  << fmt(a.theta_ref_deg, 3) << "  " << std::setw(7) << fmt(a.v_ref_v, 3) << "   "
                  << name << '\n';
    };
    print_anchor(out.anchor_q, "QxI");
    print_anchor(out.anchor_i, "IxI");
    std::cout << "phase shift " << fmt(out.shift_deg, 3) << " deg; 90+-" << spec.beta_max_deg
              << ": " << (within ? "YES" : "NO") << '\n';

    if (!json_path.empty()) {
        nlohmann::ordered_json j;
        j["freq_ghz"] = freq_ghz;
        j["iq_shift_deg"] = out.shift_deg;
        j["within_spec"] = within;
        j["anchors"]["IxI"] = {{"y", out.anchor_i.y},
                               {"theta_ref_deg", out.anchor_i.theta_ref_deg},
                               {"v_ref_v", out.anchor_i.v_ref_v}};
        j["anchors"]["QxI"] = {{"y", out.anchor_q.y},
                               {"theta_ref_deg", out.anchor_q.theta_ref_deg},
                               {"v_ref_v", out.anchor_q.v_ref_v}};
        std::ofstream outf(json_path);
        outf << j.dump(2) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Virtual phase-detector measurement bench"};
    app.require_subcommand(1);

    std::string data_dir = PDBENCH_DATA_DIR;
    std::string json_path;
    app.add_option("--data", data_dir, "directory holding the reference data files");

    auto* t1 = app.add_subcommand("table1", "recompute the combiner null/max reference table");
    t1->add_option("--json", json_path, "also write the comparison as JSON");

    auto* corr = app.add_subcommand("corrections", "compute generator corrections from S-parameters");
    std::string sparams_path;
    std::string published_path;
    corr->add_option("sparams", sparams_path, "S-parameter file")->required();
    corr->add_option("--published", published_path,
                     "recorded corrections to compare against (default: bundled table)");
    corr->add_option("--json", json_path, "also write the table as JSON");

    auto* sim = app.add_subcommand("simulate", "run a simulated measurement campaign");
    std::string config_path, out_dir;
    long long seed = -1;
    double line_offset = 0.0, beta_max = 0.0;
    bool skip_netcal = false, no_timestamp = false;
    int parallel = 0;
    sim->add_option("config", config_path, "campaign config file")->required();
    sim->add_option("--out", out_dir, "output directory (overrides the config)");
    sim->add_option("--seed", seed, "report provenance seed (overrides the config)");
    sim->add_option("--line-offset-db", line_offset, "reference line offset below P_SUM");
    sim->add_option("--beta-max", beta_max, "quadrature acceptance half-width in degrees");
    sim->add_flag("--skip-netcal", skip_netcal, "do not apply the network corrections");
    sim->add_option("--parallel", parallel, "worker threads across frequency points");
    sim->add_flag("--no-timestamp", no_timestamp, "omit the timestamp from the report provenance");

    auto* ref = app.add_subcommand("reference", "reference recorded curves offline");
    std::vector<std::string> ref_files;
    double ref_beta_max = 0.0;
    ref->add_option("files", ref_files, "curve CSV file(s) followed by the reference-voltage file")
        ->required()
        ->expected(-2);
    ref->add_option("--beta-max", ref_beta_max, "quadrature acceptance half-width in degrees");
    ref->add_option("--json", json_path, "also write the result as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t1->parsed())
            return cmd_table1(data_dir, json_path);
        if (corr->parsed()) {
            if (published_path.empty())
                published_path = data_dir + "/correction_reference_table.txt";
            return cmd_corrections(sparams_path, published_path, json_path);
        }
        if (sim->parsed())
            return cmd_simulate(config_path, out_dir, seed, line_offset, beta_max, skip_netcal,
                                parallel, no_timestamp);
        if (ref->parsed())
            return cmd_reference(ref_files, ref_beta_max, json_path);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    return 2;
}
