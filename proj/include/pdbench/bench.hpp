#ifndef PDBENCH_BENCH_HPP
#define PDBENCH_BENCH_HPP

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "pdbench/dut.hpp"
#include "pdbench/netcal.hpp"
#include "pdbench/phasor.hpp"

namespace pdbench {

enum class Role { primary, secondary };

/// Everything an operator does at the bench has a time cost; the clock is the
/// only source of simulation time and never moves backwards.
enum class ActionKind {
    set_frequency,
    set_power,
    set_phase,
    switch_press,
    pushbutton,
    banana_reconnect,
    vac_adjust,
    corrections_entry, ///< paired power+phase entry done as one step
    sa_read,
};

inline constexpr int kNumActionKinds = 9;

struct ActionCosts {
    std::array<double, kNumActionKinds> seconds{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0};

    double cost(ActionKind kind) const { return seconds[static_cast<int>(kind)]; }
    void set(ActionKind kind, double s) { seconds[static_cast<int>(kind)] = s; }
    /// Sets every operator action to the same cost (the SA marker read stays free).
    void set_uniform(double s);
};

struct BenchClock {
    double now_s = 0.0;
    ActionCosts costs;

    void advance(double dt_s);
    void charge(ActionKind kind) { advance(costs.cost(kind)); }
};

/// Deterministic inter-generator phase drift attributed to the secondary
/// source. With settle_tau_s == 0 the drift is linear; otherwise the rate
/// decays exponentially (a source settling after a frequency change) and the
/// accumulated offset approaches rate * tau.
struct DriftModel {
    double rate_deg_per_s = 0.2;
    double ref_frequency_hz = 3e9;
    bool scale_with_carrier = true;
    double settle_tau_s = 0.0;
    double initial_offset_deg = 0.0;

    double rate_at(double carrier_hz) const;
    double offset_deg(double t_s, double carrier_hz) const;
};

struct GeneratorState {
    Role role = Role::primary;
    double frequency_hz = 3e9;
    double power_dbm = 0.0;
    double phase_deg = 0.0;    ///< [0, 360)
    double freq_trim_hz = 0.0; ///< operator-applied offset (e.g. +1 kHz, +11 Hz)
    double level_error_db = 0.0;
};

/// Instantaneous output phasor of one generator. The secondary carries the
/// drift; both carry the linear phase ramp from their frequency trim.
Phasor generator_phasor(const GeneratorState& gen, const DriftModel& drift, double t_s);

struct AdcConfig {
    double full_scale_v = 5.0;
    int bits = 10;
    double sample_rate_hz = 2800.0;
    int buffer_len = 280;

    int max_code() const { return (1 << bits) - 1; }
    double dequantize(int code) const { return code * full_scale_v / max_code(); }
};

struct VacConfig {
    double v_ref_v = 2.5;
    double r1_ohm = 10000.0;
    double r2_ohm = 10000.0; ///< adjustable potentiometer
    double r3_ohm = 1000.0;

    double gain() const { return 0.5 * (1.0 + r1_ohm / (r2_ohm + r3_ohm)); }
};

/// Level shifter/amplifier between detector output and ADC; clamps to the
/// converter range and reports when it did.
double vac_transfer(const VacConfig& cfg, double v_in, bool* clipped = nullptr);

/// round(v / full_scale * max_code) clamped to the code range.
int adc_sample(const AdcConfig& cfg, double v);

/// Ideal power-meter reading with a noise floor.
PowerDbm sa_measure(const Phasor& p, double noise_floor_dbm);

/// Samples buffer_len codes at uniform intervals starting at the current
/// clock time; the clock advances by the capture duration. The buffer must
/// span more than one beat period.
std::vector<int> acquire_buffer(const AdcConfig& cfg, const std::function<double(double)>& source_v,
                                BenchClock& clock, double beat_hz);

struct BenchConfig {
    double freq_ghz = 3.0;
    double primary_power_dbm = 0.0;
    double secondary_power_dbm = 0.0;
    double primary_level_error_db = 0.0;
    double secondary_level_error_db = 0.0;
    double noise_floor_dbm = -90.0;
    DriftModel drift;
    AdcConfig adc;
    VacConfig vac;
    std::optional<SParamSet> network; ///< identity network when absent
    DutModel dut;
    DetectorMode mode = DetectorMode::IxI;
    ActionCosts costs;
};

struct BufferCapture {
    std::vector<int> codes;
    bool clipped = false;
    double start_time_s = 0.0;
};

/// Single-threaded state machine for the whole bench: two quasi-synchronized
/// generators, the SPDT switches, combiner, SA, detector, VAC and ADC, all on
/// one virtual clock. Mutators charge their operator-action cost unless the
/// raw variant is used (composites charge one cost and then use raw ops).
class Bench {
public:
    explicit Bench(BenchConfig cfg);

    // Charged operator actions.
    void set_theta_m(double deg);
    void set_theta_s(double deg);
    void set_power_m(double dbm);
    void set_power_s(double dbm);
    void set_primary_trim(double hz);
    void set_switches(int state);
    void set_mode(DetectorMode mode);
    void set_vac(double r2_ohm, double v_ref_v);

    // Uncharged variants for composite steps.
    void set_theta_m_raw(double deg);
    void set_theta_s_raw(double deg);
    void set_power_m_raw(double dbm);

    void charge(ActionKind kind) { clock_.charge(kind); }
    void wait(double dt_s) { clock_.advance(dt_s); }

    /// SA marker at the combiner output (noise floor when routed to the DUT).
    PowerDbm sa_read();
    /// Detector voltage after the VAC, quantized through the ADC (pushbutton).
    double capture_vd();
    double capture_vd_raw();
    /// Full ADC buffer capture at the configured sample rate (pushbutton).
    BufferCapture capture_buffer(double beat_hz);

    /// Detector output range over a full input phase rotation at current
    /// amplitudes, both products considered (what the scope shows at +1 kHz).
    std::pair<double, double> detector_range() const;

    const BenchClock& clock() const { return clock_; }
    const BenchConfig& config() const { return cfg_; }
    const VacConfig& vac() const { return cfg_.vac; }
    int switches() const { return switches_; }
    DetectorMode mode() const { return mode_; }
    double theta_m() const { return primary_.phase_deg; }
    double theta_s() const { return secondary_.phase_deg; }
    double power_m() const { return primary_.power_dbm; }

    // Simulation-truth introspection (diagnostics and tests, not operator I/O).

    /// Deviation from perfect antiphase at the combiner inputs, current
    /// settings included. Zero means the SA would read a perfect null.
    double true_null_deviation_deg() const;
    /// Detector input phase difference minus the commanded primary phase;
    /// with corrections applied this is exactly the drift deviation.
    double true_dut_delta_error_deg() const;

private:
    struct TrimState {
        double trim_hz = 0.0;
        double accum_deg = 0.0;
        double since_s = 0.0;
    };

    std::complex<double> generator_complex(Role role, double t_s) const;
    std::complex<double> branch_to_combiner(Role role, double t_s) const;
    std::complex<double> branch_to_dut(Role role, double t_s) const;
    double detector_volts(double t_s) const;
    double vac_out(double t_s, bool* clipped) const;
    void set_trim(Role role, double hz);

    BenchConfig cfg_;
    BenchClock clock_;
    GeneratorState primary_;
    GeneratorState secondary_;
    TrimState primary_trim_;
    TrimState secondary_trim_;
    SParamSet network_;
    int switches_ = 2;
    DetectorMode mode_ = DetectorMode::IxI;
};

} // namespace pdbench

#endif
