#include "pdbench/csvio.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
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

void write_curve_csv(std::ostream& out, const DetectorCurve& curve)
{
    out << "# mode=" << to_string(curve.mode) << '\n';
    out << "# freq_ghz=" << std::setprecision(10) << curve.freq_ghz << '\n';
    out << "# sample_rate_hz=" << curve.sample_rate_hz << '\n';
    out << "# beat_hz=" << curve.beat_hz << '\n';
    out << "# full_scale_v=" << curve.full_scale_v << '\n';
    out << "# bits=" << curve.bits << '\n';
    out << "# clipped=" << (curve.clipped ? 1 : 0) << '\n';
    out << "# start_time_s=" << curve.start_time_s << '\n';
    out << "sample_index,code,volts\n";
    const auto volts = curve.volts();
    for (size_t i = 0; i < curve.codes.size(); ++i)
        out << i << ',' << curve.codes[i] << ',' << std::setprecision(9) << volts[i] << '\n';
}

std::vector<DetectorCurve> read_curves_csv(std::istream& in)
{
    std::vector<DetectorCurve> curves;
    DetectorCurve* cur = nullptr;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty())
            continue;
        if (t[0] == '#') {
            const std::string meta = trim(t.substr(1));
            const auto eq = meta.find('=');
            if (eq == std::string::npos)
                continue;
            const std::string key = trim(meta.substr(0, eq));
            const std::string val = trim(meta.substr(eq + 1));
            if (key == "mode") {
                curves.emplace_back();
                cur = &curves.back();
                if (val == "IxI")
                    cur->mode = DetectorMode::IxI;
                else if (val == "QxI")
                    cur->mode = DetectorMode::QxI;
                else
                    throw ParseError("line " + std::to_string(line_no) + ": unknown mode " + val);
            } else if (cur != nullptr) {
                try {
                    if (key == "freq_ghz")
                        cur->freq_ghz = std::stod(val);
                    else if (key == "sample_rate_hz")
                        cur->sample_rate_hz = std::stod(val);
                    else if (key == "beat_hz")
                        cur->beat_hz = std::stod(val);
                    else if (key == "full_scale_v")
                        cur->full_scale_v = std::stod(val);
                    else if (key == "bits")
                        cur->bits = std::stoi(val);
                    else if (key == "clipped")
                        cur->clipped = (std::stoi(val) != 0);
                    else if (key == "start_time_s")
                        cur->start_time_s = std::stod(val);
                } catch (const std::exception&) {
                    throw ParseError("line " + std::to_string(line_no) + ": bad value for " + key);
                }
            }
            continue;
        }
        if (t.rfind("sample_index", 0) == 0)
            continue;
        if (cur == nullptr)
            throw ParseError("line " + std::to_string(line_no) + ": sample row before any '# mode=' header");
        std::istringstream row(t);
        long idx = 0;
        int code = 0;
        char comma1 = 0;
        if (!(row >> idx >> comma1 >> code) || comma1 != ',')
            throw ParseError("line " + std::to_string(line_no) + ": expected 'index,code,volts'");
        cur->codes.push_back(code);
    }
    if (curves.empty())
        throw ParseError("no curves found in CSV");
    for (const auto& c : curves) {
        if (c.codes.empty())
            throw ParseError("curve with no samples in CSV");
    }
    return curves;
}

std::vector<DetectorCurve> read_curves_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open curve CSV: " + path);
    return read_curves_csv(in);
}

void write_refs(std::ostream& out, const ReferenceVoltages& refs, double freq_ghz)
{
    out << std::setprecision(17); // exact double round trip
    out << "# detector reference voltages (V)\n";
    out << "freq_ghz = " << freq_ghz << '\n';
    out << "vi_180 = " << refs.vi_180 << '\n';
    out << "vi_90 = " << refs.vi_90 << '\n';
    out << "vq_90 = " << refs.vq_90 << '\n';
    out << "vq_180 = " << refs.vq_180 << '\n';
    out << "acquired_at_s = " << refs.acquired_at_s << '\n';
    out << "valid = " << (refs.valid ? 1 : 0) << '\n';
}

std::pair<ReferenceVoltages, double> read_refs(std::istream& in)
{
    ReferenceVoltages refs;
    double freq_ghz = 0.0;
    bool saw_any = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string t = trim(line);
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        double x = 0.0;
        try {
            x = std::stod(val);
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(line_no) + ": bad number for " + key);
        }
        saw_any = true;
        if (key == "freq_ghz")
            freq_ghz = x;
        else if (key == "vi_180")
            refs.vi_180 = x;
        else if (key == "vi_90")
            refs.vi_90 = x;
        else if (key == "vq_90")
            refs.vq_90 = x;
        else if (key == "vq_180")
            refs.vq_180 = x;
        else if (key == "acquired_at_s")
            refs.acquired_at_s = x;
        else if (key == "valid")
            refs.valid = (x != 0.0);
        else
            throw ParseError("line " + std::to_string(line_no) + ": unknown key " + key);
    }
    if (!saw_any)
        throw ParseError("empty reference-voltage file");
    return {refs, freq_ghz};
}

std::pair<ReferenceVoltages, double> read_refs_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open reference-voltage file: " + path);
    return read_refs(in);
}

} // namespace pdbench
