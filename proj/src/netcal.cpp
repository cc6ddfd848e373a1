#include "pdbench/netcal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pdbench/errors.hpp"

namespace pdbench {

std::complex<double> PolarDb::to_complex() const
{
    return std::polar(mag_linear(), deg_to_rad(phase_deg));
}

double PolarDb::mag_linear() const
{
    return std::pow(10.0, mag_db / 20.0);
}

namespace {

void check_passive(const PolarDb& p, const char* name, int line_no)
{
    if (p.mag_db > 0.0) {
        std::ostringstream msg;
        msg << "line " << line_no << ": " << name << " magnitude " << p.mag_db
            << " dB exceeds 0 dB (passive network expected)";
        throw InvariantError(msg.str());
    }
}

} // namespace

std::vector<SParamSet> load_sparams(std::istream& in)
{
    std::vector<SParamSet> sets;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream row(line);
        SParamSet sp;
        if (!(row >> sp.freq_ghz))
            continue; // blank or comment-only line
        if (!(row >> sp.s31.mag_db >> sp.s31.phase_deg >> sp.s32.mag_db >> sp.s32.phase_deg >>
              sp.sa1.mag_db >> sp.sa1.phase_deg >> sp.sb2.mag_db >> sp.sb2.phase_deg)) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected 9 numeric columns";
            throw ParseError(msg.str());
        }
        check_passive(sp.s31, "s31", line_no);
        check_passive(sp.s32, "s32", line_no);
        check_passive(sp.sa1, "sa1", line_no);
        check_passive(sp.sb2, "sb2", line_no);
        for (PolarDb* p : {&sp.s31, &sp.s32, &sp.sa1, &sp.sb2})
            p->phase_deg = wrap180(p->phase_deg);
        for (const auto& existing : sets) {
            if (std::fabs(existing.freq_ghz - sp.freq_ghz) < 1e-3) {
                std::ostringstream msg;
                msg << "line " << line_no << ": duplicate frequency " << sp.freq_ghz << " GHz";
                throw DuplicateFrequency(msg.str());
            }
        }
        sets.push_back(sp);
    }
    if (sets.empty())
        throw ParseError("no S-parameter rows found");
    std::sort(sets.begin(), sets.end(),
              [](const SParamSet& a, const SParamSet& b) { return a.freq_ghz < b.freq_ghz; });
    return sets;
}

std::vector<SParamSet> load_sparams_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open S-parameter file: " + path);
    return load_sparams(in);
}

void write_sparams(std::ostream& out, const std::vector<SParamSet>& sets)
{
    out << "# freq_ghz  s31_db s31_deg  s32_db s32_deg  sa1_db sa1_deg  sb2_db sb2_deg\n";
    out << std::setprecision(10);
    for (const auto& sp : sets) {
        out << sp.freq_ghz << "  " << sp.s31.mag_db << ' ' << sp.s31.phase_deg << "  "
            << sp.s32.mag_db << ' ' << sp.s32.phase_deg << "  " << sp.sa1.mag_db << ' '
            << sp.sa1.phase_deg << "  " << sp.sb2.mag_db << ' ' << sp.sb2.phase_deg << '\n';
    }
}

const SParamSet& find_sparams(const std::vector<SParamSet>& sets, double freq_ghz)
{
    for (const auto& sp : sets) {
        if (std::fabs(sp.freq_ghz - freq_ghz) < 1e-3)
            return sp;
    }
    std::ostringstream msg;
    msg << "no S-parameter row at " << freq_ghz << " GHz (1 MHz tolerance, no interpolation)";
    throw UnknownFrequency(msg.str());
}

CorrectionSet compute_corrections(const SParamSet& sp)
{
    CorrectionSet c;
    c.freq_ghz = sp.freq_ghz;
    // Secondary wave correction is the ratio s31*sb2 / (s32*sa1); the power
    // part is moved onto the primary generator with opposite sign so the
    // secondary only needs a phase entry.
    const double dp_sc_db = sp.s31.mag_db + sp.sb2.mag_db - sp.s32.mag_db - sp.sa1.mag_db;
    c.dp_mc_db = -dp_sc_db;
    c.dtheta_sc_deg =
        wrap180(sp.s31.phase_deg + sp.sb2.phase_deg - sp.s32.phase_deg - sp.sa1.phase_deg);
    c.dp_db = sp.sa1.mag_db;
    return c;
}

Routing switch_route(int state)
{
    if (state != 1 && state != 2) {
        std::ostringstream msg;
        msg << "switch state " << state << " invalid (must be 1 or 2)";
        throw InvalidSwitchState(msg.str());
    }
    return Routing{state};
}

NetworkOutputs apply_network(const SParamSet& sp, const Routing& route, const Phasor& port1_in,
                             const Phasor& port2_in)
{
    NetworkOutputs out;
    if (route.state == 1) {
        out.dut_a = Phasor::from_complex(port1_in.to_complex() * sp.sa1.to_complex());
        out.dut_b = Phasor::from_complex(port2_in.to_complex() * sp.sb2.to_complex());
    } else {
        out.combiner = Phasor::from_complex(port1_in.to_complex() * sp.s31.to_complex() +
                                            port2_in.to_complex() * sp.s32.to_complex());
    }
    return out;
}

SParamSet identity_network(double freq_ghz)
{
    SParamSet sp;
    sp.freq_ghz = freq_ghz;
    return sp;
}

double round_half_even(double value, int decimals)
{
    const double scale = std::pow(10.0, decimals);
    return std::nearbyint(value * scale) / scale;
}

} // namespace pdbench
