#include "pdbench/curve_ref.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "pdbench/angles.hpp"
#include "pdbench/errors.hpp"

namespace pdbench {

namespace {

double sinc(double x)
{
    if (std::fabs(x) < 1e-12)
        return 1.0;
    const double px = kPi * x;
    return std::sin(px) / px;
}

double lerp_at(std::span<const double> x, double pos)
{
    const auto n = static_cast<long>(x.size());
    if (pos <= 0.0)
        return x[0];
    if (pos >= static_cast<double>(n - 1))
        return x[static_cast<size_t>(n - 1)];
    const long i = static_cast<long>(pos);
    const double f = pos - static_cast<double>(i);
    return x[static_cast<size_t>(i)] * (1.0 - f) + x[static_cast<size_t>(i + 1)] * f;
}

/// Mean-square mismatch between the buffer and itself shifted by a fractional
/// lag; zero for an exactly periodic signal at the true period.
double self_match_mse(std::span<const double> x, double lag)
{
    const auto n = static_cast<long>(x.size());
    const long last = n - 1 - static_cast<long>(std::ceil(lag));
    if (last < 8)
        return std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (long i = 0; i <= last; ++i) {
        const double d = x[static_cast<size_t>(i)] - lerp_at(x, static_cast<double>(i) + lag);
        acc += d * d;
    }
    return acc / static_cast<double>(last + 1);
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol)
{
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - (b - a) * kInvPhi;
    double d = a + (b - a) * kInvPhi;
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * kInvPhi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * kInvPhi;
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Normalized correlation of the buffer with itself at an integer lag. The
/// mean is removed globally, not per segment: with the short overlap of a
/// just-over-one-period buffer, per-segment affine normalization would make
/// any two monotone arcs look alike and wash out the peak.
double normalized_autocorr(std::span<const double> x, double mean, long lag)
{
    const auto n = static_cast<long>(x.size());
    const long m = n - lag;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (long i = 0; i < m; ++i) {
        const double a = x[static_cast<size_t>(i)] - mean;
        const double b = x[static_cast<size_t>(i + lag)] - mean;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace

std::vector<double> oversample(std::span<const double> samples, int factor)
{
    if (factor < 1)
        throw ConfigError("oversample factor must be >= 1");
    const auto n = static_cast<long>(samples.size());
    if (factor == 1)
        return {samples.begin(), samples.end()};
    if (n < 4)
        throw ConfigError("need at least 4 samples to oversample");

    constexpr int kHalfTaps = 16;
    std::vector<double> out(static_cast<size_t>(n) * static_cast<size_t>(factor));
    for (long j = 0; j < n * factor; ++j) {
        if (j % factor == 0) {
            out[static_cast<size_t>(j)] = samples[static_cast<size_t>(j / factor)];
            continue;
        }
        const double t = static_cast<double>(j) / factor;
        const long i0 = static_cast<long>(std::floor(t));

        if (i0 - kHalfTaps + 1 < 0 || i0 + kHalfTaps >= n) {
            // A one-sided sinc tail biases the result, so near the edges use
            // cubic interpolation through the nearest four samples instead.
            long base = std::clamp(i0 - 1, 0L, n - 4);
            double acc = 0.0;
            for (long k = 0; k < 4; ++k) {
                double w = 1.0;
                for (long l = 0; l < 4; ++l) {
                    if (l == k)
                        continue;
                    w *= (t - static_cast<double>(base + l)) / static_cast<double>(k - l);
                }
                acc += w * samples[static_cast<size_t>(base + k)];
            }
            out[static_cast<size_t>(j)] = acc;
            continue;
        }

        double acc = 0.0, wsum = 0.0;
        for (long i = i0 - kHalfTaps + 1; i <= i0 + kHalfTaps; ++i) {
            const double u = t - static_cast<double>(i);
            const double w = sinc(u) * (0.5 + 0.5 * std::cos(kPi * u / kHalfTaps));
            acc += w * samples[static_cast<size_t>(i)];
            wsum += w;
        }
        out[static_cast<size_t>(j)] = acc / wsum;
    }
    return out;
}

PhaseVector estimate_period(std::span<const double> samples, const AnchorOptions& opts)
{
    const auto n = static_cast<long>(samples.size());
    if (n < 32)
        throw NoPeriodicity("buffer too short for period estimation");

    constexpr long kMinOverlap = 24;
    const long lag_min = std::max<long>(16, n / 4);
    const long lag_max = n - kMinOverlap;
    if (lag_max <= lag_min + 2)
        throw NoPeriodicity("buffer too short for the lag search range");

    double mean = 0.0;
    for (double v : samples)
        mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> corr(static_cast<size_t>(lag_max - lag_min + 1));
    double best = -2.0;
    for (long lag = lag_min; lag <= lag_max; ++lag) {
        const double r = normalized_autocorr(samples, mean, lag);
        corr[static_cast<size_t>(lag - lag_min)] = r;
        best = std::max(best, r);
    }
    if (best < opts.min_autocorr) {
        std::ostringstream msg;
        msg << "no periodicity: autocorrelation peak " << best << " below " << opts.min_autocorr;
        throw NoPeriodicity(msg.str());
    }

    // Smallest-lag local maximum close to the global peak, so a buffer that
    // happens to hold two periods locks onto the fundamental.
    long peak = -1;
    for (long lag = lag_min + 1; lag < lag_max; ++lag) {
        const double r = corr[static_cast<size_t>(lag - lag_min)];
        if (r >= corr[static_cast<size_t>(lag - 1 - lag_min)] &&
            r >= corr[static_cast<size_t>(lag + 1 - lag_min)] && r >= 0.9 * best &&
            r >= opts.min_autocorr) {
            peak = lag;
            break;
        }
    }
    if (peak < 0)
        throw NoPeriodicity("no interior autocorrelation peak found");

    // Quadratic interpolation around the integer peak.
    const double rm = corr[static_cast<size_t>(peak - 1 - lag_min)];
    const double r0 = corr[static_cast<size_t>(peak - lag_min)];
    const double rp = corr[static_cast<size_t>(peak + 1 - lag_min)];
    double period = static_cast<double>(peak);
    const double denom = rm - 2.0 * r0 + rp;
    if (std::fabs(denom) > 1e-15) {
        double shift = 0.5 * (rm - rp) / denom;
        shift = std::clamp(shift, -1.0, 1.0);
        period += shift;
    }

    // Least-squares polish: minimize the self-match error over a fractional
    // lag near the peak. Sub-hundredth-of-a-sample accuracy on clean data.
    const double lo = std::max(static_cast<double>(lag_min), period - 2.0);
    const double hi = std::min(static_cast<double>(lag_max), period + 2.0);
    period = golden_min([&](double p) { return self_match_mse(samples, p); }, lo, hi, 1e-5);

    PhaseVector pv;
    pv.period_samples = period;
    pv.phases_deg.resize(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i)
        pv.phases_deg[static_cast<size_t>(i)] = 360.0 * static_cast<double>(i) / period;
    return pv;
}

std::vector<LevelCrossing> level_crossings(std::span<const double> samples, double level)
{
    std::vector<LevelCrossing> out;
    const auto n = static_cast<long>(samples.size());

    const double lo = *std::min_element(samples.begin(), samples.end());
    const double hi = *std::max_element(samples.begin(), samples.end());
    if (level > hi) {
        // Tangent leniency: a reference a hair above the curve (quantization)
        // resolves to the nearest peak.
        const auto it = std::max_element(samples.begin(), samples.end());
        out.push_back({static_cast<double>(it - samples.begin()), 0});
        return out;
    }
    if (level < lo) {
        const auto it = std::min_element(samples.begin(), samples.end());
        out.push_back({static_cast<double>(it - samples.begin()), 0});
        return out;
    }

    for (long i = 0; i + 1 < n; ++i) {
        const double a = samples[static_cast<size_t>(i)] - level;
        const double b = samples[static_cast<size_t>(i + 1)] - level;
        if (a == 0.0 && b == 0.0)
            continue;
        if (a == 0.0) {
            // Exact hit: direction from the neighbors.
            const double prev = (i > 0) ? samples[static_cast<size_t>(i - 1)] - level : 0.0;
            int dir = 0;
            if (prev < 0.0 && b > 0.0)
                dir = 1;
            else if (prev > 0.0 && b < 0.0)
                dir = -1;
            out.push_back({static_cast<double>(i), dir});
        } else if (a * b < 0.0) {
            const double frac = a / (a - b);
            out.push_back({static_cast<double>(i) + frac, b > a ? 1 : -1});
        }
    }
    if (out.empty()) {
        // Level equals an extremum exactly; report the touch.
        for (long i = 1; i + 1 < n; ++i) {
            if (samples[static_cast<size_t>(i)] == level) {
                out.push_back({static_cast<double>(i), 0});
                break;
            }
        }
    }
    return out;
}

AnchorSolution resolve_anchor(std::span<const double> samples, const PhaseVector& pv,
                              double vx_180, double vx_90, const AnchorOptions& opts)
{
    const double v_max = *std::max_element(samples.begin(), samples.end());
    const double v_min = *std::min_element(samples.begin(), samples.end());
    const double v_dm = 0.5 * (v_max + v_min);

    AnchorSolution sol;
    if (std::fabs(vx_180 - v_dm) <= std::fabs(vx_90 - v_dm)) {
        sol.y = 180;
        sol.v_ref_v = vx_180;
    } else {
        sol.y = 90;
        sol.v_ref_v = vx_90;
    }
    const double v_other = (sol.y == 180) ? vx_90 : vx_180;
    const int to_other = (sol.y == 90) ? 1 : -1; // 90 -> 180 is +90, 180 -> 90 is -90

    if (sol.v_ref_v > v_max || sol.v_ref_v < v_min) {
        std::ostringstream msg;
        msg << "reference voltage " << sol.v_ref_v << " V outside curve range [" << v_min << ", "
            << v_max << "]";
        throw NoCrossing(msg.str());
    }

    // Crossing direction at the anchor, derived from where the companion
    // reference sits relative to the curve middle. For a cosine-shaped curve
    // dV/dtheta at 90 has the sign of V(180) - Vdm, and at 180 the sign of
    // -(V(90) - Vdm).
    int slope = 0;
    if (v_other > v_dm)
        slope = to_other;
    else if (v_other < v_dm)
        slope = -to_other;
    sol.slope = slope;

    auto cuts = level_crossings(samples, sol.v_ref_v);
    if (cuts.empty())
        throw NoCrossing("anchor voltage never intersects the curve");

    std::vector<LevelCrossing> candidates;
    if (slope != 0) {
        for (const auto& c : cuts)
            if (c.direction == slope || c.direction == 0)
                candidates.push_back(c);
    }
    if (candidates.empty())
        candidates = cuts;

    auto phase_at = [&](double pos) { return 360.0 * pos / pv.period_samples; };

    // Merge candidates that are one whole period apart: same solution.
    std::vector<double> cand_phases;
    for (const auto& c : candidates) {
        const double ph = phase_at(c.pos_samples);
        bool dup = false;
        for (double existing : cand_phases)
            if (angular_distance(existing, ph) < 1.0)
                dup = true;
        if (!dup)
            cand_phases.push_back(ph);
    }

    const auto other_cuts = level_crossings(samples, v_other);
    if (other_cuts.empty())
        throw NoCrossing("companion reference voltage never intersects the curve");

    std::vector<double> other_phases;
    for (const auto& c : other_cuts)
        other_phases.push_back(phase_at(c.pos_samples));

    std::vector<std::pair<double, double>> scored; // (discriminant, candidate phase)
    for (double cand : cand_phases) {
        const double predicted = cand + to_other * 90.0;
        double d = 360.0;
        for (double oc : other_phases)
            d = std::min(d, angular_distance(predicted, oc));
        scored.emplace_back(d, cand);
    }
    std::sort(scored.begin(), scored.end());

    sol.candidates_deg = {scored[0].second, scored.size() > 1 ? scored[1].second : scored[0].second};
    sol.discriminants_deg = {scored[0].first, scored.size() > 1 ? scored[1].first : 360.0};
    sol.other_crossings_deg = {other_phases[0],
                               other_phases.size() > 1 ? other_phases[1] : other_phases[0]};

    if (scored.size() > 1 && (scored[1].first - scored[0].first) < opts.tie_threshold_deg) {
        std::ostringstream msg;
        msg << "anchor ambiguity: discriminants " << scored[0].first << " and " << scored[1].first
            << " within " << opts.tie_threshold_deg << " deg";
        throw AmbiguityUnresolved(msg.str());
    }

    sol.theta_ref_deg = wrap360(scored[0].second);
    return sol;
}

ReferencedCurve restore_curve(std::span<const double> samples, const PhaseVector& pv,
                              const AnchorSolution& anchor, DetectorMode mode)
{
    ReferencedCurve rc;
    rc.mode = mode;
    rc.anchor = anchor;
    const auto keep = static_cast<size_t>(std::floor(pv.period_samples));
    const size_t n = std::min(keep, samples.size());
    rc.theta_m_deg.resize(n);
    rc.volts.resize(n);
    for (size_t i = 0; i < n; ++i) {
        rc.theta_m_deg[i] =
            wrap360(pv.phases_deg[i] - anchor.theta_ref_deg + static_cast<double>(anchor.y));
        rc.volts[i] = samples[i];
    }
    return rc;
}

namespace {

/// Fundamental phase of a referenced curve: angle psi such that the curve is
/// proportional to cos(theta - psi) plus harmonics and offset.
double fundamental_phase_deg(const ReferencedCurve& c, double min_fundamental_v)
{
    const size_t n = c.volts.size();
    if (n < 8)
        throw DegenerateCurve("referenced curve too short");
    const double mean = std::accumulate(c.volts.begin(), c.volts.end(), 0.0) / static_cast<double>(n);
    std::complex<double> z{0.0, 0.0};
    for (size_t i = 0; i < n; ++i) {
        const double th = deg_to_rad(c.theta_m_deg[i]);
        z += (c.volts[i] - mean) * std::complex<double>(std::cos(th), -std::sin(th));
    }
    const double amplitude = 2.0 * std::abs(z) / static_cast<double>(n);
    if (amplitude < min_fundamental_v) {
        std::ostringstream msg;
        msg << "fundamental amplitude " << amplitude << " V below threshold " << min_fundamental_v;
        throw DegenerateCurve(msg.str());
    }
    return -rad_to_deg(std::arg(z));
}

} // namespace

double iq_phase_shift(const ReferencedCurve& curve_i, const ReferencedCurve& curve_q,
                      double min_fundamental_v)
{
    const double psi_i = fundamental_phase_deg(curve_i, min_fundamental_v);
    const double psi_q = fundamental_phase_deg(curve_q, min_fundamental_v);
    return wrap360(psi_q - psi_i);
}

} // namespace pdbench
