#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "cosetsle/driving.hpp"
#include "cosetsle/partition.hpp"
#include "cosetsle/stochastic.hpp"

namespace cosetsle {

// ---------------------------------------------------------------------------
// Crossing (arch) probabilities
// ---------------------------------------------------------------------------

struct CrossingResult {
    double x;
    double z_c1;  // Z_C2(1-x): left-right partner
    double z_c2;  // Z_C2(x)
    double p_c1;
    double p_c2;
    DFConfig cfg;  // evaluator metadata (relevant for the DF family)
};

/// P[C_i] = Z_{C_i} / (Z_{C_1} + Z_{C_2}) with Z_C1(x) = Z_C2(1-x).
/// p_c1 is computed as 1 - p_c2, so the normalization is exact, and the
/// symmetric construction makes p_c1(x) = p_c2(1-x) hold to the last bit.
inline CrossingResult crossing_probability(const CosetModel& m, double x,
                                           const DFConfig& cfg = {}) {
    if (!(x > 0.0 && x < 1.0))
        throw std::domain_error("crossing_probability: x outside (0,1)");
    CrossingResult r;
    r.x = x;
    r.cfg = cfg;
    r.z_c2 = block_C2(m, x, cfg);
    r.z_c1 = x == 0.5 ? r.z_c2 : block_C2(m, 1.0 - x, cfg);
    r.p_c2 = r.z_c2 / (r.z_c1 + r.z_c2);
    r.p_c1 = 1.0 - r.p_c2;
    if (!(r.p_c2 >= 0.0 && r.p_c2 <= 1.0))
        throw numeric_error("crossing_probability: probability outside [0,1]", r.z_c1, r.z_c2);
    return r;
}

/// CSV grid export: x, Z_C1, Z_C2, p_C1, p_C2.
inline void write_crossing_grid_csv(const CosetModel& m, std::span<const double> xs,
                                    const DFConfig& cfg, std::ostream& os) {
    os << "x,Z_C1,Z_C2,p_C1,p_C2\n";
    for (double x : xs) {
        const CrossingResult r = crossing_probability(m, x, cfg);
        char line[200];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.x, r.z_c1, r.z_c2,
                      r.p_c1, r.p_c2);
        os << line;
    }
}

// ---------------------------------------------------------------------------
// Asymptotic-exponent diagnostics
// ---------------------------------------------------------------------------

struct SlopeFit {
    double slope;
    double residual;  // rms of the log-log fit residuals
};

/// Least-squares log-log slope of `f` against the distance to the endpoint
/// (0 or 1) over the sweep points.
template <class F>
SlopeFit asymptotic_exponent(F&& f, int endpoint, std::span<const double> sweep) {
    if (sweep.size() < 3)
        throw std::domain_error("asymptotic_exponent: need at least 3 sweep points");
    if (endpoint != 0 && endpoint != 1)
        throw std::domain_error("asymptotic_exponent: endpoint must be 0 or 1");
    std::vector<double> lx, ly;
    for (double x : sweep) {
        const double value = f(x);
        if (!(value > 0.0))
            throw numeric_error("asymptotic_exponent: nonpositive block value", x, value);
        lx.push_back(std::log(endpoint == 0 ? x : 1.0 - x));
        ly.push_back(std::log(value));
    }
    const double n = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    SlopeFit fit{};
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (icept + fit.slope * lx[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

// ---------------------------------------------------------------------------
// Martingale surrogate for the crossing probability
// ---------------------------------------------------------------------------

struct ProbMartingaleOptions {
    double horizon{0.05};
    double dt{2e-5};
    double gap_guard{0.01};     // stop before the steep near-collision region
    double adapt_coeff{0.005};  // tighter than the default: controls Euler bias
    DriftMode drift_mode{DriftMode::Full};
};

/// Evolves one 3-SLE sample from positions (0, x0, 1) and returns
/// P[C_2](x_stop) at the stopping time (horizon or near-collision).
inline double prob_martingale_sample(const CosetModel& model,
                                     std::shared_ptr<const CrossRatioDrift> table,
                                     double x0, const ProbMartingaleOptions& opt,
                                     std::uint64_t seed, std::uint64_t sample,
                                     const DFConfig& cfg = {}) {
    DrivingConfig dc = DrivingConfig::from_model(model);
    dc.dt_base = opt.dt;
    dc.adapt_coeff = opt.adapt_coeff;
    dc.grow_with_gap = false;
    dc.epsilon_collision = opt.gap_guard;
    dc.drift_mode = opt.drift_mode;
    MultiSleSde sde(dc, table);
    LoewnerState st({0.0, x0, 1.0}, dc.lie_dim, /*record_journal=*/false);
    SdeStreams rng(seed, sample, 3, dc.lie_dim);
    sde.run_until(st, rng, opt.horizon);
    const auto& xs = st.tips();
    const double x_stop = (xs[1] - xs[0]) / (xs[2] - xs[0]);
    return crossing_probability(model, x_stop, cfg).p_c2;
}

struct MartingaleStatistic {
    double statistic;  // E[P(x_stop)] - P(x0)
    double std_error;
    double p0;
    long samples;
};

/// E[P_C2(x_stop)] - P_C2(x0): a zero-drift (martingale) check of the
/// conjectural two-channel Z driving the 3-SLE.  The ZeroDrift mode is the
/// power control: it must reject.
inline MartingaleStatistic martingale_of_probability(const CosetModel& model, double x0,
                                                     const DFConfig& cfg, long samples,
                                                     std::uint64_t seed,
                                                     const ProbMartingaleOptions& opt = {}) {
    if (!(x0 > 0.0 && x0 < 1.0))
        throw std::domain_error("martingale_of_probability: x0 outside (0,1)");
    auto table = std::make_shared<const CrossRatioDrift>(model, cfg);
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < samples; ++i) {
        const double p =
            prob_martingale_sample(model, table, x0, opt, seed,
                                   static_cast<std::uint64_t>(i), cfg);
        sum += p;
        sumsq += p * p;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    MartingaleStatistic out{};
    out.p0 = crossing_probability(model, x0, cfg).p_c2;
    out.statistic = mean - out.p0;
    out.std_error = std::sqrt(var / n);
    out.samples = samples;
    return out;
}

}  // namespace cosetsle
