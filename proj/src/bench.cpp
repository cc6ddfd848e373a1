#include "pdbench/bench.hpp"

#include <cmath>
#include <sstream>

#include "pdbench/errors.hpp"

namespace pdbench {

void ActionCosts::set_uniform(double s)
{
    for (int i = 0; i < kNumActionKinds; ++i) {
        if (static_cast<ActionKind>(i) != ActionKind::sa_read)
            seconds[i] = s;
    }
}

void BenchClock::advance(double dt_s)
{
    if (dt_s < 0.0)
        throw BenchError("clock cannot move backwards");
    now_s += dt_s;
}

double DriftModel::rate_at(double carrier_hz) const
{
    if (!scale_with_carrier || ref_frequency_hz <= 0.0)
        return rate_deg_per_s;
    return rate_deg_per_s * carrier_hz / ref_frequency_hz;
}

double DriftModel::offset_deg(double t_s, double carrier_hz) const
{
    const double rate = rate_at(carrier_hz);
    if (settle_tau_s > 0.0)
        return initial_offset_deg + rate * settle_tau_s * (1.0 - std::exp(-t_s / settle_tau_s));
    return initial_offset_deg + rate * t_s;
}

Phasor generator_phasor(const GeneratorState& gen, const DriftModel& drift, double t_s)
{
    double phase = gen.phase_deg + 360.0 * gen.freq_trim_hz * t_s;
    if (gen.role == Role::secondary)
        phase += drift.offset_deg(t_s, gen.frequency_hz);
    return Phasor(dbm_to_amplitude(gen.power_dbm + gen.level_error_db), phase);
}

double vac_transfer(const VacConfig& cfg, double v_in, bool* clipped)
{
    if (cfg.r2_ohm + cfg.r3_ohm <= 0.0)
        throw InvalidDivider("VAC divider resistance r2 + r3 must be positive");
    const double v = (cfg.v_ref_v + v_in) / 2.0 * (1.0 + cfg.r1_ohm / (cfg.r2_ohm + cfg.r3_ohm));
    if (clipped)
        *clipped = (v < 0.0 || v > 5.0);
    return std::min(std::max(v, 0.0), 5.0);
}

int adc_sample(const AdcConfig& cfg, double v)
{
    const long code = std::lround(v / cfg.full_scale_v * cfg.max_code());
    return static_cast<int>(std::min<long>(std::max<long>(code, 0), cfg.max_code()));
}

PowerDbm sa_measure(const Phasor& p, double noise_floor_dbm)
{
    return PowerDbm{std::max(amplitude_to_dbm(p.amplitude_v), noise_floor_dbm)};
}

std::vector<int> acquire_buffer(const AdcConfig& cfg, const std::function<double(double)>& source_v,
                                BenchClock& clock, double beat_hz)
{
    const double span_periods = cfg.buffer_len / cfg.sample_rate_hz * beat_hz;
    if (span_periods <= 1.0) {
        std::ostringstream msg;
        msg << "buffer spans " << span_periods << " beat periods; need more than one";
        throw ConfigError(msg.str());
    }
    std::vector<int> codes(static_cast<size_t>(cfg.buffer_len));
    const double t0 = clock.now_s;
    for (int k = 0; k < cfg.buffer_len; ++k)
        codes[static_cast<size_t>(k)] = adc_sample(cfg, source_v(t0 + k / cfg.sample_rate_hz));
    clock.advance(cfg.buffer_len / cfg.sample_rate_hz);
    return codes;
}

Bench::Bench(BenchConfig cfg) : cfg_(std::move(cfg))
{
    clock_.costs = cfg_.costs;
    const double f_hz = cfg_.freq_ghz * 1e9;
    primary_ = GeneratorState{Role::primary, f_hz, cfg_.primary_power_dbm,
                              0.0,           0.0,  cfg_.primary_level_error_db};
    secondary_ = GeneratorState{Role::secondary, f_hz, cfg_.secondary_power_dbm,
                                0.0,             0.0,  cfg_.secondary_level_error_db};
    network_ = cfg_.network ? *cfg_.network : identity_network(cfg_.freq_ghz);
    mode_ = cfg_.mode;
}

void Bench::set_theta_m(double deg)
{
    clock_.charge(ActionKind::set_phase);
    set_theta_m_raw(deg);
}

void Bench::set_theta_s(double deg)
{
    clock_.charge(ActionKind::set_phase);
    set_theta_s_raw(deg);
}

void Bench::set_power_m(double dbm)
{
    clock_.charge(ActionKind::set_power);
    set_power_m_raw(dbm);
}

void Bench::set_power_s(double dbm)
{
    clock_.charge(ActionKind::set_power);
    secondary_.power_dbm = dbm;
}

void Bench::set_theta_m_raw(double deg) { primary_.phase_deg = wrap360(deg); }
void Bench::set_theta_s_raw(double deg) { secondary_.phase_deg = wrap360(deg); }
void Bench::set_power_m_raw(double dbm) { primary_.power_dbm = dbm; }

void Bench::set_trim(Role role, double hz)
{
    TrimState& ts = (role == Role::primary) ? primary_trim_ : secondary_trim_;
    // Phase stays continuous across a frequency step.
    ts.accum_deg += 360.0 * ts.trim_hz * (clock_.now_s - ts.since_s);
    ts.trim_hz = hz;
    ts.since_s = clock_.now_s;
}

void Bench::set_primary_trim(double hz)
{
    clock_.charge(ActionKind::set_frequency);
    set_trim(Role::primary, hz);
}

void Bench::set_switches(int state)
{
    clock_.charge(ActionKind::switch_press);
    switches_ = switch_route(state).state;
}

void Bench::set_mode(DetectorMode mode)
{
    clock_.charge(ActionKind::banana_reconnect);
    mode_ = mode;
}

void Bench::set_vac(double r2_ohm, double v_ref_v)
{
    clock_.charge(ActionKind::vac_adjust);
    cfg_.vac.r2_ohm = r2_ohm;
    cfg_.vac.v_ref_v = v_ref_v;
}

std::complex<double> Bench::generator_complex(Role role, double t_s) const
{
    const GeneratorState& gen = (role == Role::primary) ? primary_ : secondary_;
    const TrimState& ts = (role == Role::primary) ? primary_trim_ : secondary_trim_;
    double phase = gen.phase_deg + ts.accum_deg + 360.0 * ts.trim_hz * (t_s - ts.since_s);
    if (role == Role::secondary)
        phase += cfg_.drift.offset_deg(t_s, gen.frequency_hz);
    return std::polar(dbm_to_amplitude(gen.power_dbm + gen.level_error_db), deg_to_rad(phase));
}

std::complex<double> Bench::branch_to_combiner(Role role, double t_s) const
{
    // Secondary drives port 1, primary drives port 2.
    const auto s = (role == Role::secondary) ? network_.s31 : network_.s32;
    return generator_complex(role, t_s) * s.to_complex();
}

std::complex<double> Bench::branch_to_dut(Role role, double t_s) const
{
    const auto s = (role == Role::secondary) ? network_.sa1 : network_.sb2;
    return generator_complex(role, t_s) * s.to_complex();
}

double Bench::detector_volts(double t_s) const
{
    const Phasor a = Phasor::from_complex(branch_to_dut(Role::secondary, t_s));
    const Phasor b = Phasor::from_complex(branch_to_dut(Role::primary, t_s));
    return detect(cfg_.dut, cfg_.freq_ghz, a, b, mode_);
}

double Bench::vac_out(double t_s, bool* clipped) const
{
    return vac_transfer(cfg_.vac, detector_volts(t_s), clipped);
}

PowerDbm Bench::sa_read()
{
    clock_.charge(ActionKind::sa_read);
    if (switches_ != 2)
        return PowerDbm{cfg_.noise_floor_dbm};
    const auto p3 =
        branch_to_combiner(Role::secondary, clock_.now_s) + branch_to_combiner(Role::primary, clock_.now_s);
    return sa_measure(Phasor::from_complex(p3), cfg_.noise_floor_dbm);
}

double Bench::capture_vd()
{
    clock_.charge(ActionKind::pushbutton);
    return capture_vd_raw();
}

double Bench::capture_vd_raw()
{
    bool clipped = false;
    const double v = vac_out(clock_.now_s, &clipped);
    return cfg_.adc.dequantize(adc_sample(cfg_.adc, v));
}

BufferCapture Bench::capture_buffer(double beat_hz)
{
    clock_.charge(ActionKind::pushbutton);
    BufferCapture cap;
    cap.start_time_s = clock_.now_s;
    bool any_clipped = false;
    cap.codes = acquire_buffer(
        cfg_.adc,
        [&](double t) {
            bool c = false;
            const double v = vac_out(t, &c);
            any_clipped = any_clipped || c;
            return v;
        },
        clock_, beat_hz);
    cap.clipped = any_clipped;
    return cap;
}

std::pair<double, double> Bench::detector_range() const
{
    const double a_amp = std::abs(branch_to_dut(Role::secondary, clock_.now_s));
    const double b_amp = std::abs(branch_to_dut(Role::primary, clock_.now_s));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (DetectorMode mode : {DetectorMode::IxI, DetectorMode::QxI}) {
        for (int k = 0; k < 1440; ++k) {
            const double delta = k * 0.25;
            const double v =
                detect(cfg_.dut, cfg_.freq_ghz, Phasor(a_amp, 0.0), Phasor(b_amp, delta), mode);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return {lo, hi};
}

double Bench::true_null_deviation_deg() const
{
    const auto num = branch_to_combiner(Role::primary, clock_.now_s);
    const auto den = branch_to_combiner(Role::secondary, clock_.now_s);
    return wrap180(rad_to_deg(std::arg(num / den)) - 180.0);
}

double Bench::true_dut_delta_error_deg() const
{
    const auto a = branch_to_dut(Role::secondary, clock_.now_s);
    const auto b = branch_to_dut(Role::primary, clock_.now_s);
    return wrap180(rad_to_deg(std::arg(b / a)) - primary_.phase_deg);
}

} // namespace pdbench
