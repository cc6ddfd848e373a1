#include "pdbench/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pdbench/errors.hpp"

namespace pdbench {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

IniFile IniFile::parse(std::istream& in)
{
    IniFile ini;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string t = trim(line);
        if (t.empty())
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ParseError("line " + std::to_string(line_no) + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            ini.sections_[section]; // create even if empty
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
        ini.sections_[section].emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open config file: " + path);
    return parse(in);
}

std::optional<std::string> IniFile::get(const std::string& section, const std::string& key) const
{
    const auto it = sections_.find(section);
    if (it == sections_.end())
        return std::nullopt;
    std::optional<std::string> result;
    for (const auto& [k, v] : it->second)
        if (k == key)
            result = v;
    return result;
}

std::vector<std::string> IniFile::get_all(const std::string& section, const std::string& key) const
{
    std::vector<std::string> out;
    const auto it = sections_.find(section);
    if (it == sections_.end())
        return out;
    for (const auto& [k, v] : it->second)
        if (k == key)
            out.push_back(v);
    return out;
}

double IniFile::get_double(const std::string& section, const std::string& key, double fallback) const
{
    const auto v = get(section, key);
    if (!v)
        return fallback;
    try {
        return std::stod(*v);
    } catch (const std::exception&) {
        throw ConfigError("bad number for [" + section + "] " + key + ": " + *v);
    }
}

int IniFile::get_int(const std::string& section, const std::string& key, int fallback) const
{
    const auto v = get(section, key);
    if (!v)
        return fallback;
    try {
        return std::stoi(*v);
    } catch (const std::exception&) {
        throw ConfigError("bad integer for [" + section + "] " + key + ": " + *v);
    }
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const
{
    const auto v = get(section, key);
    if (!v)
        return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    if (s == "true" || s == "1" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
        return false;
    throw ConfigError("bad boolean for [" + section + "] " + key + ": " + *v);
}

std::string IniFile::get_string(const std::string& section, const std::string& key,
                                const std::string& fallback) const
{
    return get(section, key).value_or(fallback);
}

bool IniFile::has_section(const std::string& section) const
{
    return sections_.count(section) != 0;
}

namespace {

struct KindName {
    ActionKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {ActionKind::set_frequency, "set_frequency"},
    {ActionKind::set_power, "set_power"},
    {ActionKind::set_phase, "set_phase"},
    {ActionKind::switch_press, "switch_press"},
    {ActionKind::pushbutton, "pushbutton"},
    {ActionKind::banana_reconnect, "banana_reconnect"},
    {ActionKind::vac_adjust, "vac_adjust"},
    {ActionKind::corrections_entry, "corrections_entry"},
    {ActionKind::sa_read, "sa_read"},
};

std::string dirname_of(const std::string& path)
{
    const auto slash = path.find_last_of('/');
    if (slash == std::string::npos)
        return ".";
    return path.substr(0, slash);
}

} // namespace

CampaignConfig parse_campaign_config(std::istream& in, const std::string& base_dir)
{
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string text = raw.str();
    std::istringstream again(text);
    const IniFile ini = IniFile::parse(again);

    CampaignConfig cfg;
    cfg.source_text = text;

    // [campaign]
    if (const auto fl = ini.get("campaign", "frequencies_ghz")) {
        std::istringstream fs(*fl);
        double f = 0.0;
        while (fs >> f)
            cfg.frequencies_ghz.push_back(f);
    }
    if (cfg.frequencies_ghz.empty())
        cfg.frequencies_ghz = {3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
    cfg.seed = static_cast<unsigned long long>(
        ini.get_double("campaign", "seed", 0.0));
    cfg.output_dir = ini.get_string("campaign", "output_dir", "out");
    cfg.parallel = ini.get_int("campaign", "parallel", 1);

    // [bench]
    BenchConfig& b = cfg.bench;
    b.primary_power_dbm = ini.get_double("bench", "primary_power_dbm", 0.0);
    b.secondary_power_dbm = ini.get_double("bench", "secondary_power_dbm", 0.0);
    b.primary_level_error_db = ini.get_double("bench", "primary_level_error_db", 0.0);
    b.secondary_level_error_db = ini.get_double("bench", "secondary_level_error_db", 0.0);
    b.noise_floor_dbm = ini.get_double("bench", "noise_floor_dbm", -90.0);

    // [drift]
    b.drift.rate_deg_per_s = ini.get_double("drift", "rate_deg_per_s", 0.2);
    b.drift.ref_frequency_hz = ini.get_double("drift", "ref_frequency_ghz", 3.0) * 1e9;
    b.drift.scale_with_carrier = ini.get_bool("drift", "scale_with_carrier", true);
    b.drift.settle_tau_s = ini.get_double("drift", "settle_tau_s", 0.0);
    b.drift.initial_offset_deg = ini.get_double("drift", "initial_offset_deg", 0.0);

    // [adc]
    b.adc.bits = ini.get_int("adc", "bits", 10);
    b.adc.full_scale_v = ini.get_double("adc", "full_scale_v", 5.0);
    b.adc.sample_rate_hz = ini.get_double("adc", "sample_rate_hz", 2800.0);
    b.adc.buffer_len = ini.get_int("adc", "buffer_len", 280);

    // [vac]
    b.vac.r1_ohm = ini.get_double("vac", "r1_ohm", 10000.0);
    b.vac.r2_ohm = ini.get_double("vac", "r2_ohm", 10000.0);
    b.vac.r3_ohm = ini.get_double("vac", "r3_ohm", 1000.0);
    b.vac.v_ref_v = ini.get_double("vac", "v_ref_v", 2.5);

    // [procedure]
    ProcedureConfig& p = cfg.procedure;
    p.line_offset_db = ini.get_double("procedure", "line_offset_db", 41.0);
    p.max_retries = ini.get_int("procedure", "max_retries", 10);
    p.skip_network_corrections = ini.get_bool("procedure", "skip_network_corrections", false);
    p.beat_offset_hz = ini.get_double("procedure", "beat_offset_hz", 11.0);
    p.gain_adjust_trim_hz = ini.get_double("procedure", "gain_adjust_trim_hz", 1000.0);
    p.await_poll_s = ini.get_double("procedure", "await_poll_s", 0.25);
    p.await_horizon_s = ini.get_double("procedure", "await_horizon_s", 3600.0);
    p.null_floor_margin_db = ini.get_double("procedure", "null_floor_margin_db", 12.0);
    p.auto_vac = ini.get_bool("procedure", "auto_vac", true);
    p.vac_target_low_v = ini.get_double("procedure", "vac_target_low_v", 0.25);
    p.vac_target_high_v = ini.get_double("procedure", "vac_target_high_v", 4.75);
    if (const auto uniform = ini.get("procedure", "action_cost_s"))
        b.costs.set_uniform(std::stod(*uniform));
    for (const auto& kn : kKindNames) {
        const std::string key = std::string("action_cost_") + kn.name + "_s";
        if (const auto v = ini.get("procedure", key))
            b.costs.set(kn.kind, std::stod(*v));
    }

    // [netcal]
    cfg.sparams_file = ini.get_string("netcal", "sparams_file", "");
    if (!cfg.sparams_file.empty()) {
        std::string path = cfg.sparams_file;
        if (!path.empty() && path.front() != '/')
            path = base_dir + "/" + path;
        cfg.sparams = load_sparams_file(path);
    }

    // [dut]
    cfg.quad.beta_max_deg = ini.get_double("dut", "beta_max_deg", 40.0);
    for (const auto& row : ini.get_all("dut", "entry")) {
        std::istringstream rs(row);
        DutEntry e;
        if (!(rs >> e.freq_ghz >> e.hybrid_shift_deg >> e.gain_i >> e.gain_q >> e.offset_i_v >>
              e.offset_q_v))
            throw ConfigError("bad [dut] entry row: " + row);
        rs >> e.harmonic2 >> e.harmonic3; // optional trailing columns
        cfg.dut.entries.push_back(e);
    }
    if (cfg.dut.entries.empty()) {
        for (double f : cfg.frequencies_ghz)
            cfg.dut.entries.push_back(DutEntry{f, 90.0, 45.0, 45.0, 0.0, 0.0, 0.0, 0.0});
    }
    b.dut = cfg.dut;

    return cfg;
}

CampaignConfig load_campaign_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    return parse_campaign_config(in, dirname_of(path));
}

std::string config_hash(const std::string& text)
{
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

} // namespace pdbench
