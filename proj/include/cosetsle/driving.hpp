#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "cosetsle/algebra.hpp"
#include "cosetsle/loewner.hpp"
#include "cosetsle/partition.hpp"
#include "cosetsle/rng.hpp"

namespace cosetsle {

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// Per-step Brownian increments with covariance
///   E[dxi_a dxi_b] = delta_ab dq,  E[dtheta^a dtheta^b] = delta^ab delta_ab dq
/// in the Killing-orthonormal generator basis.
struct NoiseIncrement {
    std::vector<double> dxi;                  // per curve
    std::vector<std::vector<double>> dtheta;  // per curve, per generator direction
};

/// One Gaussian substream per (curve, channel); channel 0 drives x,
/// channels 1..lie_dim drive the Lie coordinates.
class SdeStreams {
public:
    SdeStreams(std::uint64_t seed, std::uint64_t sample, int curves, int lie_dim)
        : lie_dim_(lie_dim) {
        streams_.reserve(static_cast<std::size_t>(curves) * (lie_dim + 1));
        for (int c = 0; c < curves; ++c)
            for (int ch = 0; ch <= lie_dim; ++ch)
                streams_.emplace_back(seed, stream_id(sample, static_cast<unsigned>(c),
                                                      static_cast<unsigned>(ch)));
    }

    double gauss(int curve, int channel) {
        return streams_[static_cast<std::size_t>(curve) * (lie_dim_ + 1) +
                        static_cast<std::size_t>(channel)]
            .next();
    }

    int lie_dim() const { return lie_dim_; }

private:
    int lie_dim_;
    std::vector<GaussianStream> streams_;
};

inline NoiseIncrement draw_noise(SdeStreams& streams, int curves, int lie_dim, double dq) {
    NoiseIncrement n;
    const double scale = std::sqrt(dq);
    n.dxi.resize(static_cast<std::size_t>(curves));
    n.dtheta.assign(static_cast<std::size_t>(curves),
                    std::vector<double>(static_cast<std::size_t>(lie_dim)));
    for (int c = 0; c < curves; ++c) {
        n.dxi[static_cast<std::size_t>(c)] = scale * streams.gauss(c, 0);
        for (int a = 1; a <= lie_dim; ++a)
            n.dtheta[static_cast<std::size_t>(c)][static_cast<std::size_t>(a - 1)] =
                scale * streams.gauss(c, a);
    }
    return n;
}

// ---------------------------------------------------------------------------
// Drift terms
// ---------------------------------------------------------------------------

/// dF_alpha = kappa dq_alpha d_alpha log Z + 2 sum_{beta != alpha} dq_beta/(x_alpha - x_beta)
inline std::vector<double> drift_F(const PurePartition& Z, std::span<const double> positions,
                                   std::span<const double> dq, double kappa) {
    if (positions.size() != dq.size())
        throw std::domain_error("drift_F: positions/dq arity mismatch");
    const std::vector<double> grad = log_Z_gradient(Z, positions);
    std::vector<double> f(positions.size(), 0.0);
    for (std::size_t a = 0; a < positions.size(); ++a) {
        double interaction = 0.0;
        for (std::size_t b = 0; b < positions.size(); ++b) {
            if (b == a) continue;
            const double diff = positions[a] - positions[b];
            if (diff == 0.0) throw std::domain_error("drift_F: coincident positions");
            interaction += dq[b] / diff;
        }
        f[a] = kappa * dq[a] * grad[a] + 2.0 * interaction;
    }
    return f;
}

/// dG^a_alpha = tau dq_alpha sum_{beta != alpha} ratio(a,beta)/(x_beta - x_alpha),
/// where ratio is the scalar part of the generator insertion.  In the
/// scalar (zero-weight) sector all ratios vanish and the Lie coordinates
/// diffuse freely.
inline std::vector<std::vector<double>> drift_G(const PurePartition& Z,
                                                const std::vector<IrrepAction>& irreps,
                                                std::span<const double> positions,
                                                std::span<const double> dq, double tau,
                                                int lie_dim = 3) {
    std::vector<std::vector<double>> g(positions.size(),
                                       std::vector<double>(static_cast<std::size_t>(lie_dim), 0.0));
    for (int a = 1; a <= lie_dim; ++a) {
        std::vector<double> ratio(positions.size());
        for (std::size_t b = 0; b < positions.size(); ++b)
            ratio[b] = insertion_ratio(Z, irreps, positions, a, static_cast<int>(b)).scalar_ratio;
        for (std::size_t al = 0; al < positions.size(); ++al) {
            double sum = 0.0;
            for (std::size_t b = 0; b < positions.size(); ++b) {
                if (b == al) continue;
                sum += ratio[b] / (positions[b] - positions[al]);
            }
            g[al][static_cast<std::size_t>(a - 1)] = tau * dq[al] * sum;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Euler-Maruyama stepper
// ---------------------------------------------------------------------------

enum class DriftMode { Full, ZeroDrift };  // ZeroDrift is the test control

struct DrivingConfig {
    double kappa{0.0};
    double tau{0.0};
    double dt_base{1e-3};
    double adapt_coeff{0.02};  // effective ds = adapt_coeff * gap^2 near/away from collisions
    bool grow_with_gap{true};  // allow dt above dt_base when gaps are wide
    double epsilon_collision{1e-4};
    DriftMode drift_mode{DriftMode::Full};
    bool zero_noise{false};
    int lie_dim{2};  // dim g - dim a (= 2 for SU(2)/U(1))
    int max_step_retries{48};

    static DrivingConfig from_model(const CosetModel& m) {
        DrivingConfig c;
        c.kappa = m.kappa_d();
        c.tau = m.tau_d();
        return c;
    }
};

struct StepInfo {
    double dt_used{0.0};
    int retries{0};
};

struct RunOutcome {
    bool collided{false};
    bool rejected{false};  // step-rejection retries exhausted
    CollisionEvent event{};
    double t_end{0.0};
    long steps{0};
};

/// Trajectory row for CSV export: t, per-curve x and Lie coordinates.
struct TrajectorySample {
    double t;
    std::vector<double> x;
    std::vector<std::vector<double>> p;
};

/// Multi-curve Euler-Maruyama evolution of
///   dx_alpha = sqrt(kappa) dxi_alpha + dF_alpha,
///   dp^a_alpha = sqrt(tau) dtheta^a_alpha + dG^a_alpha,
/// composed with elementary slit maps.  The log-gradient of Z is inlined
/// for the closed-form kinds and may be served from a CrossRatioDrift
/// table for the four-point kind.
class MultiSleSde {
public:
    MultiSleSde(DrivingConfig cfg, std::shared_ptr<const PurePartition> z)
        : cfg_(cfg), z_(std::move(z)) {
        if (!z_) throw std::domain_error("MultiSleSde: null partition function");
        if (const auto* two = z_->two_sle_kind()) {
            kind_ = Kind::TwoSle;
            delta_ = two->delta;
        } else if (z_->is_four_point()) {
            kind_ = Kind::FourPointDirect;
        } else {
            kind_ = Kind::Generic;
        }
        arity_ = z_->arity();
    }

    MultiSleSde(DrivingConfig cfg, std::shared_ptr<const CrossRatioDrift> table)
        : cfg_(cfg), table_(std::move(table)) {
        if (!table_) throw std::domain_error("MultiSleSde: null drift table");
        kind_ = Kind::FourPointTable;
        h_pref_ = kac_h12(table_->model().kappa_d());
        arity_ = 3;
    }

    /// Per-(generator, curve) scalar insertion ratios feeding dG; defaults
    /// to zero (the scalar-sector experiments).
    void set_insertion_scalars(std::vector<std::vector<double>> s) {
        insertion_scalars_ = std::move(s);
    }

    const DrivingConfig& config() const { return cfg_; }
    int arity() const { return arity_; }

    static constexpr int max_curves = 8;

    /// One adaptive Euler-Maruyama step; throws step_rejected when halving
    /// cannot produce ordered positions within max_step_retries.
    StepInfo step(LoewnerState& st, SdeStreams& rng, double max_dt) const {
        const int m = st.curve_count();
        if (m != arity_) throw std::domain_error("MultiSleSde: state arity mismatch");
        if (m > max_curves) throw std::domain_error("MultiSleSde: too many curves");
        if (rng.lie_dim() < cfg_.lie_dim ||
            static_cast<int>(st.lie()[0].size()) < cfg_.lie_dim)
            throw std::domain_error("MultiSleSde: lie_dim exceeds state/stream layout");
        const auto& x = st.tips();

        double dt = cfg_.dt_base;
        if (m >= 2) {
            double gap = x[1] - x[0];
            for (int i = 1; i + 1 < m; ++i) gap = std::min(gap, x[static_cast<std::size_t>(i) + 1] -
                                                           x[static_cast<std::size_t>(i)]);
            const double dt_gap = cfg_.adapt_coeff * gap * gap / (2.0 * cfg_.kappa);
            dt = cfg_.grow_with_gap ? dt_gap : std::min(cfg_.dt_base, dt_gap);
        }
        dt = std::min(dt, max_dt);

        const double sqrt_kappa = std::sqrt(cfg_.kappa);
        std::array<double, max_curves> grad{};
        std::array<double, max_curves> newx{};
        StepInfo info;
        for (int attempt = 0;; ++attempt) {
            if (attempt > cfg_.max_step_retries)
                throw step_rejected("sde_step: retries exhausted");
            log_gradient(x, std::span<double>(grad.data(), static_cast<std::size_t>(m)));
            bool ordered = true;
            const double sdt = std::sqrt(dt);
            for (int a = 0; a < m; ++a) {
                const double noise = cfg_.zero_noise ? 0.0 : rng.gauss(a, 0) * sdt;
                double drift = 0.0;
                if (cfg_.drift_mode == DriftMode::Full) {
                    drift = cfg_.kappa * dt * grad[static_cast<std::size_t>(a)];
                    for (int b = 0; b < m; ++b)
                        if (b != a)
                            drift += 2.0 * dt / (x[static_cast<std::size_t>(a)] -
                                                 x[static_cast<std::size_t>(b)]);
                }
                newx[static_cast<std::size_t>(a)] =
                    x[static_cast<std::size_t>(a)] + sqrt_kappa * noise + drift;
            }
            for (int a = 0; a + 1 < m; ++a)
                ordered = ordered && newx[static_cast<std::size_t>(a)] <
                                         newx[static_cast<std::size_t>(a) + 1];
            if (ordered) break;
            dt *= 0.5;
            ++info.retries;
        }

        // Lie coordinates: free diffusion plus the insertion-ratio drift.
        const double sqrt_tau = std::sqrt(cfg_.tau);
        const double sdt = std::sqrt(dt);
        auto& lie = st.lie();
        for (int a = 0; a < m; ++a) {
            for (int ch = 1; ch <= cfg_.lie_dim; ++ch) {
                const double noise = cfg_.zero_noise ? 0.0 : rng.gauss(a, ch) * sdt;
                double dg = 0.0;
                if (cfg_.drift_mode == DriftMode::Full && !insertion_scalars_.empty()) {
                    const auto& ratios = insertion_scalars_[static_cast<std::size_t>(ch - 1)];
                    for (int b = 0; b < m; ++b)
                        if (b != a)
                            dg += ratios[static_cast<std::size_t>(b)] /
                                  (x[static_cast<std::size_t>(b)] - x[static_cast<std::size_t>(a)]);
                    dg *= cfg_.tau * dt;
                }
                lie[static_cast<std::size_t>(a)][static_cast<std::size_t>(ch - 1)] +=
                    sqrt_tau * noise + dg;
            }
        }

        std::array<double, max_curves> dq{};
        for (int a = 0; a < m; ++a) dq[static_cast<std::size_t>(a)] = dt;
        st.advance(std::span<const double>(dq.data(), static_cast<std::size_t>(m)),
                   std::span<const double>(newx.data(), static_cast<std::size_t>(m)));
        info.dt_used = dt;
        return info;
    }

    /// Evolves until collision (adjacent gap < epsilon_collision) or the
    /// time horizon.  Optionally records the trajectory.
    RunOutcome run_until(LoewnerState& st, SdeStreams& rng, double horizon,
                         std::vector<TrajectorySample>* trajectory = nullptr) const {
        RunOutcome out;
        while (st.time() < horizon) {
            if (auto ev = collision_check(st, cfg_.epsilon_collision)) {
                out.collided = true;
                out.event = *ev;
                break;
            }
            const double remaining = horizon - st.time();
            try {
                step(st, rng, remaining);
            } catch (const step_rejected&) {
                out.rejected = true;
                break;
            }
            ++out.steps;
            if (trajectory) trajectory->push_back({st.time(), st.tips(), st.lie()});
        }
        if (!out.collided && !out.rejected) {
            if (auto ev = collision_check(st, cfg_.epsilon_collision)) {
                out.collided = true;
                out.event = *ev;
            }
        }
        out.t_end = st.time();
        return out;
    }

private:
    enum class Kind { TwoSle, Generic, FourPointDirect, FourPointTable };

    void log_gradient(std::span<const double> xs, std::span<double> out) const {
        switch (kind_) {
            case Kind::TwoSle: {
                const double g = delta_ / (xs[0] - xs[1]);
                out[0] = g;
                out[1] = -g;
                return;
            }
            case Kind::FourPointTable: {
                const double den = xs[2] - xs[0];
                const double x = (xs[1] - xs[0]) / den;
                const double w = (*table_)(x);
                const double pref = 2.0 * h_pref_ / den;
                out[0] = pref + w * (-(xs[2] - xs[1]) / (den * den));
                out[1] = w / den;
                out[2] = -pref + w * (-(xs[1] - xs[0]) / (den * den));
                return;
            }
            default: {
                const std::vector<double> g = z_->log_gradient(xs);
                for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i];
                return;
            }
        }
    }

    DrivingConfig cfg_;
    std::shared_ptr<const PurePartition> z_;
    std::shared_ptr<const CrossRatioDrift> table_;
    std::vector<std::vector<double>> insertion_scalars_;  // [generator][curve]
    Kind kind_{Kind::Generic};
    double delta_{0.0};
    double h_pref_{0.0};
    int arity_{0};
};

/// Spec-shaped single-step entry point: advances a copy of the state by one
/// adaptive step.
inline LoewnerState sde_step(LoewnerState state, const MultiSleSde& sde, SdeStreams& rng,
                             double max_dt = std::numeric_limits<double>::infinity()) {
    sde.step(state, rng, max_dt);
    return state;
}

/// Trajectory CSV export: t, alpha, x_alpha, p_1..p_d.
inline void write_trajectory_csv(const std::vector<TrajectorySample>& rows, int lie_dim,
                                 std::ostream& os) {
    os << "t,alpha,x_alpha";
    for (int a = 1; a <= lie_dim; ++a) os << ",p_" << a;
    os << "\n";
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.x.size(); ++c) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", row.t);
            os << buf << ',' << (c + 1);
            std::snprintf(buf, sizeof buf, ",%.17g", row.x[c]);
            os << buf;
            for (int a = 0; a < lie_dim; ++a) {
                std::snprintf(buf, sizeof buf, ",%.17g", row.p[c][static_cast<std::size_t>(a)]);
                os << buf;
            }
            os << "\n";
        }
}

}  // namespace cosetsle
