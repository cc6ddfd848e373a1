#ifndef PDBENCH_TESTS_HELPERS_HPP
#define PDBENCH_TESTS_HELPERS_HPP

#include <cmath>
#include <random>
#include <vector>

#include "pdbench/angles.hpp"
#include "pdbench/bench.hpp"
#include "pdbench/curve_ref.hpp"

namespace pdbench::testing {

/// Synthetic acquisition curve: v(i) = offset + amp * (cos x + h2 cos 2x + h3 cos 3x)
/// with x = 360 * i / period + phase0. The curve value at input phase theta is
/// the same expression with x = theta, so the phase origin of the buffer is
/// phase0 and the anchors can be generated from the same closed form.
struct SynthSpec {
    int n = 280;
    double period_samples = 280.0 / 1.1;
    double phase0_deg = 0.0;
    double amp_v = 1.0;
    double offset_v = 2.5;
    double h2 = 0.0;
    double h3 = 0.0;
    bool quantize = false;
    AdcConfig adc{};
};

inline double synth_value(const SynthSpec& s, double x_deg)
{
    const double v = s.offset_v + s.amp_v * (cos_deg(x_deg) + s.h2 * cos_deg(2.0 * x_deg) +
                                             s.h3 * cos_deg(3.0 * x_deg));
    if (!s.quantize)
        return v;
    return s.adc.dequantize(adc_sample(s.adc, v));
}

inline std::vector<double> synth_volts(const SynthSpec& s)
{
    std::vector<double> v(static_cast<size_t>(s.n));
    for (int i = 0; i < s.n; ++i)
        v[static_cast<size_t>(i)] = synth_value(s, 360.0 * i / s.period_samples + s.phase0_deg);
    return v;
}

/// Independent shift estimator: circular cross-correlation of the two
/// referenced curves on a fine lag grid with parabolic peak refinement.
inline double xcorr_shift_deg(const ReferencedCurve& ci, const ReferencedCurve& cq)
{
    constexpr int kGrid = 2048;
    auto grid_resample = [](const ReferencedCurve& c) {
        // Wrap-aware nearest-sample resampling onto a uniform theta grid.
        std::vector<double> g(kGrid, 0.0), w(kGrid, 0.0);
        for (size_t i = 0; i < c.theta_m_deg.size(); ++i) {
            const int k = static_cast<int>(std::lround(c.theta_m_deg[i] / 360.0 * kGrid)) % kGrid;
            g[static_cast<size_t>(k)] += c.volts[i];
            w[static_cast<size_t>(k)] += 1.0;
        }
        // Fill holes from neighbors.
        for (int k = 0; k < kGrid; ++k) {
            if (w[static_cast<size_t>(k)] > 0.0) {
                g[static_cast<size_t>(k)] /= w[static_cast<size_t>(k)];
            } else {
                int l = k;
                while (w[static_cast<size_t>((l + kGrid - 1) % kGrid)] == 0.0)
                    l = (l + kGrid - 1) % kGrid;
                g[static_cast<size_t>(k)] =
                    g[static_cast<size_t>((l + kGrid - 1) % kGrid)];
            }
        }
        double mean = 0.0;
        for (double v : g)
            mean += v;
        mean /= kGrid;
        for (double& v : g)
            v -= mean;
        return g;
    };

    const auto gi = grid_resample(ci);
    const auto gq = grid_resample(cq);
    auto score = [&](int lag) {
        double acc = 0.0;
        for (int k = 0; k < kGrid; ++k)
            acc += gq[static_cast<size_t>((k + lag) % kGrid)] * gi[static_cast<size_t>(k)];
        return acc;
    };
    int best = 0;
    double best_s = -1e300;
    for (int lag = 0; lag < kGrid; ++lag) {
        const double s = score(lag);
        if (s > best_s) {
            best_s = s;
            best = lag;
        }
    }
    const double sm = score((best + kGrid - 1) % kGrid);
    const double sp = score((best + 1) % kGrid);
    double frac = 0.0;
    const double denom = sm - 2.0 * best_s + sp;
    if (std::fabs(denom) > 1e-30)
        frac = 0.5 * (sm - sp) / denom;
    // gq(theta + lag) matches gi(theta): Q leads I by lag on the grid.
    return wrap360((best + frac) * 360.0 / kGrid);
}

/// Exhaustive anchor search: try every oversampled position as the hypothesis
/// "this sample sits at theta_m = y" and score it by the reconstruction error
/// against both reference voltages.
inline double brute_force_anchor_deg(std::span<const double> samples, const PhaseVector& pv,
                                     int y, double v_ref, double v_other)
{
    const double period = pv.period_samples;
    const auto n = static_cast<long>(samples.size());
    const double to_other = (y == 90) ? +90.0 : -90.0;
    auto value_at = [&](double pos) {
        double p = std::fmod(pos, period);
        if (p < 0.0)
            p += period;
        const long i = static_cast<long>(p);
        const double f = p - static_cast<double>(i);
        const long j = std::min(i + 1, n - 1);
        return samples[static_cast<size_t>(i)] * (1.0 - f) + samples[static_cast<size_t>(j)] * f;
    };
    double best_err = 1e300;
    double best_pos = 0.0;
    const long limit = std::min<long>(n, static_cast<long>(std::ceil(period)));
    for (long p = 0; p < limit; ++p) {
        const double d1 = samples[static_cast<size_t>(p)] - v_ref;
        const double d2 = value_at(static_cast<double>(p) + to_other / 360.0 * period) - v_other;
        const double err = d1 * d1 + d2 * d2;
        if (err < best_err) {
            best_err = err;
            best_pos = static_cast<double>(p);
        }
    }
    return 360.0 * best_pos / period;
}

inline BenchConfig ideal_bench_config(double freq_ghz = 3.0, double hybrid_shift_deg = 90.0,
                                      double gain = 45.0)
{
    BenchConfig cfg;
    cfg.freq_ghz = freq_ghz;
    cfg.drift.rate_deg_per_s = 0.0;
    cfg.dut.entries = {DutEntry{freq_ghz, hybrid_shift_deg, gain, gain, 0.0, 0.0, 0.0, 0.0}};
    return cfg;
}

} // namespace pdbench::testing

#endif
