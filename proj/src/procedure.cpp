#include "pdbench/procedure.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "pdbench/errors.hpp"

namespace pdbench {

std::vector<double> DetectorCurve::volts() const
{
    AdcConfig adc;
    adc.full_scale_v = full_scale_v;
    adc.bits = bits;
    std::vector<double> v(codes.size());
    for (size_t i = 0; i < codes.size(); ++i)
        v[i] = adc.dequantize(codes[i]);
    return v;
}

ProcedureEngine::ProcedureEngine(Bench& bench, ProcedureConfig cfg, CorrectionSet corrections)
    : bench_(bench), cfg_(cfg), corr_(corrections), base_power_m_(bench.power_m())
{
}

double ProcedureEngine::read_power() { return bench_.sa_read().value; }

double ProcedureEngine::probe_theta(double theta_deg)
{
    bench_.set_theta_s(theta_deg);
    return read_power();
}

double ProcedureEngine::probe_power(double dbm)
{
    bench_.set_power_m(dbm);
    return read_power();
}

void ProcedureEngine::record_truth(const char* label)
{
    truth_.push_back(CaptureTruth{label, bench_.clock().now_s, bench_.true_null_deviation_deg(),
                                  bench_.true_dut_delta_error_deg()});
}

void ProcedureEngine::apply_corrections()
{
    if (cfg_.skip_network_corrections)
        return;
    bench_.set_power_m_raw(bench_.power_m() + corr_.dp_mc_db);
    bench_.set_theta_s_raw(bench_.theta_s() + corr_.dtheta_sc_deg);
}

void ProcedureEngine::restore_corrections()
{
    if (cfg_.skip_network_corrections)
        return;
    bench_.set_power_m_raw(bench_.power_m() - corr_.dp_mc_db);
    bench_.set_theta_s_raw(bench_.theta_s() - corr_.dtheta_sc_deg);
}

NullResult ProcedureEngine::null_search()
{
    bench_.set_theta_m(180.0);

    // Coarse sweep of the full circle.
    double best_theta = 0.0;
    double best_p = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 36; ++k) {
        const double theta = 10.0 * k;
        const double p = probe_theta(theta);
        if (p < best_p) {
            best_p = p;
            best_theta = theta;
        }
    }

    // Local scan.
    double center = best_theta;
    best_p = std::numeric_limits<double>::infinity();
    for (int k = -10; k <= 10; ++k) {
        const double theta = center + 1.5 * k;
        const double p = probe_theta(theta);
        if (p < best_p) {
            best_p = p;
            best_theta = theta;
        }
    }
    center = best_theta;

    // Golden-section refinement to the generator entry granularity. Exact on
    // a still target; a drifting one is handed to the tracker below.
    constexpr double kInvPhi = 0.6180339887498949;
    auto golden_theta = [&](double lo, double hi, double tol) {
        double a = lo, b = hi;
        double c = b - (b - a) * kInvPhi;
        double d = a + (b - a) * kInvPhi;
        double fc = probe_theta(c), fd = probe_theta(d);
        while (b - a > tol) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - (b - a) * kInvPhi;
                fc = probe_theta(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + (b - a) * kInvPhi;
                fd = probe_theta(d);
            }
        }
        return 0.5 * (a + b);
    };
    center = golden_theta(center - 2.0, center + 2.0, cfg_.null_phase_tol_deg);
    bench_.set_theta_s(center);

    // Adaptive three-point tracker: follows a null that drifted away during
    // the slower stages. It grows the step only while it keeps losing ground
    // to the same side and shrinks it once the minimum sits inside the
    // bracket, down to the entry granularity on a still target.
    auto track_null = [&](double step, int max_cycles) {
        int settled = 0;
        int last_side = 0;
        for (int cycle = 0; cycle < max_cycles && settled < 2; ++cycle) {
            const double p_lo = probe_theta(center - step);
            const double p_mid = probe_theta(center);
            const double p_hi = probe_theta(center + step);
            if (p_mid <= p_lo && p_mid <= p_hi) {
                if (step <= cfg_.null_phase_tol_deg)
                    ++settled;
                step = std::max(step * 0.5, cfg_.null_phase_tol_deg);
                last_side = 0;
            } else {
                const int side = (p_lo < p_hi) ? -1 : 1;
                center += side * step;
                if (side == last_side)
                    step = std::min(step * 1.6, 4.0); // persistently behind
                else if (last_side != 0)
                    step = std::max(step * 0.6, cfg_.null_phase_tol_deg);
                last_side = side;
                settled = 0;
            }
        }
        bench_.set_theta_s(center);
    };
    track_null(0.7, 40);

    // Balance the amplitudes: a coarse bracket, then a least-squares pass.
    // The null keeps drifting while the power knob is being worked, so the
    // fine pass fits measured power against both the power offset and time;
    // the linear time term absorbs the drift ramp that would otherwise bias
    // a sequential minimum search.
    auto golden_power = [&](double lo, double hi, double tol) {
        double a = lo, b = hi;
        double c = b - (b - a) * kInvPhi;
        double d = a + (b - a) * kInvPhi;
        double fc = probe_power(c), fd = probe_power(d);
        while (b - a > tol) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - (b - a) * kInvPhi;
                fc = probe_power(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + (b - a) * kInvPhi;
                fd = probe_power(d);
            }
        }
        const double best = 0.5 * (a + b);
        bench_.set_power_m(best);
        return best;
    };
    const double coarse_dp = golden_power(base_power_m_ - 3.0, base_power_m_ + 3.0, 0.3);
    track_null(0.7, 6);
    {
        // Staggered offsets decorrelate the power axis from elapsed time.
        constexpr double kOffsets[] = {0.0, 0.45, -0.45, 0.3, -0.3, 0.15, -0.15};
        const double t_ref = bench_.clock().now_s;
        double xs[7], ps[7], ts[7];
        int m = 0;
        for (double off : kOffsets) {
            const double dpw =
                std::clamp(coarse_dp + off, base_power_m_ - 3.0, base_power_m_ + 3.0);
            const double dbm = probe_power(dpw);
            xs[m] = dpw - coarse_dp;
            ps[m] = std::pow(10.0, dbm / 10.0); // linear power: quadratic in amplitude
            ts[m] = bench_.clock().now_s - t_ref;
            ++m;
        }
        // Least squares for p = A + B x + C x^2 + D t + E t^2.
        constexpr int kP = 5;
        double n[kP][kP] = {};
        double rhs[kP] = {};
        for (int i = 0; i < m; ++i) {
            const double row[kP] = {1.0, xs[i], xs[i] * xs[i], ts[i], ts[i] * ts[i]};
            for (int r = 0; r < kP; ++r) {
                rhs[r] += row[r] * ps[i];
                for (int cidx = 0; cidx < kP; ++cidx)
                    n[r][cidx] += row[r] * row[cidx];
            }
        }
        for (int col = 0; col < kP; ++col) { // Gaussian elimination, partial pivot
            int piv = col;
            for (int r = col + 1; r < kP; ++r)
                if (std::fabs(n[r][col]) > std::fabs(n[piv][col]))
                    piv = r;
            for (int cidx = 0; cidx < kP; ++cidx)
                std::swap(n[col][cidx], n[piv][cidx]);
            std::swap(rhs[col], rhs[piv]);
            for (int r = col + 1; r < kP; ++r) {
                const double f = n[r][col] / n[col][col];
                for (int cidx = col; cidx < kP; ++cidx)
                    n[r][cidx] -= f * n[col][cidx];
                rhs[r] -= f * rhs[col];
            }
        }
        double beta[kP];
        for (int r = kP - 1; r >= 0; --r) {
            double acc = rhs[r];
            for (int cidx = r + 1; cidx < kP; ++cidx)
                acc -= n[r][cidx] * beta[cidx];
            beta[r] = acc / n[r][r];
        }
        double dp_fit = coarse_dp;
        if (beta[2] > 0.0)
            dp_fit = coarse_dp + std::clamp(-beta[1] / (2.0 * beta[2]), -0.45, 0.45);
        bench_.set_power_m(std::clamp(dp_fit, base_power_m_ - 3.0, base_power_m_ + 3.0));
    }

    // Final phase lock right before the capture.
    track_null(1.0, 20);
    const double p_null = read_power();

    NullResult res;
    res.theta_s_ref_deg = wrap360(center);
    res.dp_m_null_db = bench_.power_m() - base_power_m_;
    res.p_null_dbm = p_null;

    bench_.set_theta_m(0.0);
    res.p_sum_dbm = read_power();
    res.line_ref_dbm = res.p_sum_dbm - cfg_.line_offset_db;
    bench_.set_theta_m(180.0);

    if (p_null - res.p_sum_dbm > -cfg_.line_offset_db + cfg_.null_floor_margin_db) {
        std::ostringstream msg;
        msg << "null floor " << p_null - res.p_sum_dbm << " dB relative to maximum; cannot reach "
            << -cfg_.line_offset_db << " dB line (margin " << cfg_.null_floor_margin_db << " dB)";
        throw NullNotFound(msg.str());
    }
    return res;
}

double ProcedureEngine::await_drift_window(NullResult& null)
{
    const double line = null.line_ref_dbm;
    const double deadline = bench_.clock().now_s + cfg_.await_horizon_s;

    auto entered = [&]() {
        null.theta_s_ref_deg = bench_.theta_s();
        return bench_.clock().now_s;
    };
    auto poll = [&]() {
        bench_.wait(cfg_.await_poll_s);
        return read_power();
    };

    if (read_power() <= line)
        return entered();

    auto trend_decreasing = [&]() {
        double prev = read_power();
        for (int i = 0; i < 2; ++i) {
            const double p = poll();
            if (p >= prev - 1e-12)
                return false;
            prev = p;
        }
        return true;
    };

    // Waits for the power to cross under the line while it keeps falling;
    // gives up early if the drift turns around.
    auto wait_for_crossing = [&]() -> std::optional<double> {
        double prev = read_power();
        while (bench_.clock().now_s < deadline) {
            const double p = poll();
            if (p <= line)
                return entered();
            if (p > prev + 1e-9)
                return std::nullopt;
            prev = p;
        }
        throw AwaitTimeout("drift never brought the SA power under the reference line");
    };

    if (trend_decreasing()) {
        if (auto t = wait_for_crossing())
            return *t;
    }

    // Power is not falling at the null setting: step the phase a little off
    // the null on the side the drift approaches from and let it run through.
    const double lead = 2.0 * phase_error_bound(-cfg_.line_offset_db, 0.0);
    const double ref = null.theta_s_ref_deg;
    for (double side : {1.0, -1.0}) {
        bench_.set_theta_s(ref + side * lead);
        if (trend_decreasing()) {
            if (auto t = wait_for_crossing())
                return *t;
        }
    }
    bench_.set_theta_s(ref);

    // Neither side approaches right now; watch until the drift comes back.
    double prev = read_power();
    while (bench_.clock().now_s < deadline) {
        const double p = poll();
        if (p <= line && p <= prev + 1e-12)
            return entered();
        prev = p;
    }
    throw AwaitTimeout("drift never brought the SA power under the reference line");
}

ReferenceVoltages ProcedureEngine::reference_acquisition(const NullResult& null)
{
    (void)null;
    truth_.clear();
    ReferenceVoltages refs;

    bench_.set_switches(1);
    record_truth("block_start");

    bench_.charge(ActionKind::corrections_entry);
    apply_corrections();

    refs.vi_180 = bench_.capture_vd();
    record_truth("vi_180");

    bench_.charge(ActionKind::pushbutton);
    bench_.set_theta_m_raw(90.0);
    refs.vi_90 = bench_.capture_vd_raw();
    record_truth("vi_90");

    bench_.set_mode(DetectorMode::QxI);

    refs.vq_90 = bench_.capture_vd();
    record_truth("vq_90");

    bench_.charge(ActionKind::pushbutton);
    bench_.set_theta_m_raw(180.0);
    refs.vq_180 = bench_.capture_vd_raw();
    record_truth("vq_180");

    bench_.charge(ActionKind::corrections_entry);
    restore_corrections();

    bench_.set_switches(2);
    record_truth("block_end");

    refs.acquired_at_s = bench_.clock().now_s;
    refs.valid = false;
    return refs;
}

bool ProcedureEngine::post_check(const NullResult& null)
{
    return read_power() <= null.line_ref_dbm;
}

std::pair<DetectorCurve, DetectorCurve> ProcedureEngine::curve_acquisition(const NullResult& null)
{
    (void)null;
    const double beat = cfg_.beat_offset_hz;

    bench_.charge(ActionKind::set_power);
    if (!cfg_.skip_network_corrections)
        bench_.set_power_m_raw(bench_.power_m() + corr_.dp_mc_db);

    bench_.set_primary_trim(beat);
    bench_.set_mode(DetectorMode::IxI);
    const BufferCapture cap_i = bench_.capture_buffer(beat);
    bench_.set_mode(DetectorMode::QxI);
    const BufferCapture cap_q = bench_.capture_buffer(beat);
    bench_.set_primary_trim(0.0);

    if (!cfg_.skip_network_corrections)
        bench_.set_power_m_raw(bench_.power_m() - corr_.dp_mc_db);

    auto make_curve = [&](DetectorMode mode, const BufferCapture& cap) {
        DetectorCurve c;
        c.mode = mode;
        c.codes = cap.codes;
        c.sample_rate_hz = bench_.config().adc.sample_rate_hz;
        c.beat_hz = beat;
        c.freq_ghz = bench_.config().freq_ghz;
        c.full_scale_v = bench_.config().adc.full_scale_v;
        c.bits = bench_.config().adc.bits;
        c.clipped = cap.clipped;
        c.start_time_s = cap.start_time_s;
        return c;
    };
    DetectorCurve ci = make_curve(DetectorMode::IxI, cap_i);
    DetectorCurve cq = make_curve(DetectorMode::QxI, cap_q);

    if (ci.clipped || cq.clipped)
        throw ClippedCurve("curve hit the VAC clamp; detector gain adjustment insufficient");
    return {ci, cq};
}

void ProcedureEngine::prepare_vac()
{
    bench_.charge(ActionKind::set_frequency); // frequency and power entry
    bench_.set_mode(DetectorMode::IxI);
    bench_.set_switches(1);
    bench_.set_primary_trim(cfg_.gain_adjust_trim_hz);

    if (cfg_.auto_vac) {
        const auto [lo, hi] = bench_.detector_range();
        const double span = hi - lo;
        const VacConfig& vac = bench_.vac();
        double r2 = vac.r2_ohm;
        double v_ref = vac.v_ref_v;
        if (span > 1e-9) {
            const double g = (cfg_.vac_target_high_v - cfg_.vac_target_low_v) / span;
            if (2.0 * g > 1.0 + 1e-9) {
                r2 = vac.r1_ohm / (2.0 * g - 1.0) - vac.r3_ohm;
                if (r2 < 1.0)
                    r2 = 1.0;
            } else {
                r2 = 1e12; // requested gain below the topology minimum of 1/2
            }
            const double g_actual = 0.5 * (1.0 + vac.r1_ohm / (r2 + vac.r3_ohm));
            v_ref = cfg_.vac_target_low_v / g_actual - lo;
        }
        bench_.set_vac(r2, v_ref);
    }

    bench_.set_primary_trim(0.0);
    bench_.set_switches(2);
}

ProcedureReport ProcedureEngine::run_point()
{
    prepare_vac();

    ProcedureReport rep;
    rep.freq_ghz = bench_.config().freq_ghz;

    int attempts = 0;
    for (;;) {
        rep.null = null_search();
        rep.window_entry_s = await_drift_window(rep.null);
        rep.refs = reference_acquisition(rep.null);
        if (post_check(rep.null)) {
            rep.refs.valid = true;
            break;
        }
        if (++attempts > cfg_.max_retries) {
            std::ostringstream msg;
            msg << "reference block failed the post-check " << attempts
                << " times; drift too fast for the configured action costs";
            throw RetriesExhausted(msg.str());
        }
    }
    rep.retries = attempts;

    auto [ci, cq] = curve_acquisition(rep.null);
    rep.curve_i = std::move(ci);
    rep.curve_q = std::move(cq);
    rep.error_budget_deg = error_budget_deg();
    rep.truth = truth_;
    return rep;
}

double ProcedureEngine::error_budget_deg() const
{
    double budget = phase_error_bound(-cfg_.line_offset_db, 0.0);
    if (cfg_.skip_network_corrections)
        budget += std::fabs(corr_.dtheta_sc_deg);
    return budget;
}

} // namespace pdbench
