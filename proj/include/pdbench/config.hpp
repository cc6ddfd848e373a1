#ifndef PDBENCH_CONFIG_HPP
#define PDBENCH_CONFIG_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdbench/bench.hpp"
#include "pdbench/procedure.hpp"

namespace pdbench {

/// Named sections of key = value lines; '#' comments; repeated keys kept in
/// order (used for per-frequency detector entries).
class IniFile {
public:
    static IniFile parse(std::istream& in);
    static IniFile parse_file(const std::string& path);

    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;

    bool has_section(const std::string& section) const;

private:
    using Entries = std::vector<std::pair<std::string, std::string>>;
    std::map<std::string, Entries> sections_;
};

struct CampaignConfig {
    std::vector<double> frequencies_ghz;
    unsigned long long seed = 0;
    std::string output_dir = "out";
    int parallel = 1;

    BenchConfig bench; ///< template; the frequency and network row are set per point
    ProcedureConfig procedure;
    QuadratureSpec quad;

    std::string sparams_file;        ///< empty means identity network
    std::vector<SParamSet> sparams;  ///< loaded rows (may be empty)
    DutModel dut;

    std::string source_text; ///< raw config bytes, hashed into the report
};

CampaignConfig load_campaign_config(const std::string& path);
CampaignConfig parse_campaign_config(std::istream& in, const std::string& base_dir);

/// FNV-1a hash of the config bytes, hex-encoded; report provenance.
std::string config_hash(const std::string& text);

} // namespace pdbench

#endif
