#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "cosetsle/errors.hpp"

namespace cosetsle {

// ---------------------------------------------------------------------------
// Elementary vertical-slit maps
// ---------------------------------------------------------------------------

/// g(z) - z for g(z) = c + sqrt((z-c)^2 + 4 dq), branch fixed so H maps
/// into H and g(z) ~ z at infinity.  Far from the slit the sqrt is
/// expanded, which keeps the O(dq/z) displacement at full precision.
inline std::complex<double> slit_displacement(std::complex<double> z, double center, double dq) {
    const std::complex<double> d = z - center;
    if (4.0 * dq <= 1e-8 * std::norm(d)) {
        const std::complex<double> u = 2.0 * dq / d;
        return u - 0.5 * u * u / d;
    }
    std::complex<double> w = std::sqrt(d * d + 4.0 * dq);
    if (w.imag() < 0.0) w = -w;
    if (w.imag() == 0.0 && d.real() < 0.0 && w.real() > 0.0) w = -w;
    return w - d;
}

inline std::complex<double> slit_map(std::complex<double> z, double center, double dq) {
    return z + slit_displacement(z, center, dq);
}

/// Real-axis restriction; points left/right of the slit base stay left/right.
inline double slit_map_real(double x, double center, double dq) {
    const double d = x - center;
    const double s = std::sqrt(d * d + 4.0 * dq);
    return center + (d >= 0.0 ? s : -s);
}

// ---------------------------------------------------------------------------
// LoewnerState
// ---------------------------------------------------------------------------

struct JournalRecord {
    long step;
    int alpha;      // 1-based curve index
    double center;  // driving position of the elementary slit
    double dq;
    double t;       // time at the start of the step
};

struct CollisionEvent {
    int first;   // 1-based adjacent pair (first, first+1)
    int second;
    double time;
    double gap;
};

/// Composed multi-slit Loewner chain: ordered tips (= driving positions),
/// per-curve Lie coordinates, consumed capacities and the composition
/// journal.  Journal recording is optional; Monte-Carlo runs that never
/// evaluate the map switch it off.
class LoewnerState {
public:
    explicit LoewnerState(std::vector<double> tips, int lie_dim = 0, bool record_journal = true)
        : tips_(std::move(tips)),
          lie_(tips_.size(), std::vector<double>(static_cast<std::size_t>(lie_dim), 0.0)),
          capacity_(tips_.size(), 0.0),
          record_journal_(record_journal) {
        for (std::size_t i = 0; i + 1 < tips_.size(); ++i)
            if (!(tips_[i] < tips_[i + 1]))
                throw std::domain_error("LoewnerState: tips must be strictly increasing");
    }

    const std::vector<double>& tips() const { return tips_; }
    std::vector<std::vector<double>>& lie() { return lie_; }
    const std::vector<std::vector<double>>& lie() const { return lie_; }
    const std::vector<double>& capacity() const { return capacity_; }
    double time() const { return time_; }
    long step_count() const { return steps_; }
    bool records_journal() const { return record_journal_; }
    const std::vector<JournalRecord>& journal() const { return journal_; }

    double total_capacity() const {
        double q = 0.0;
        for (double qi : capacity_) q += qi;
        return q;
    }

    int curve_count() const { return static_cast<int>(tips_.size()); }

    /// Appends one elementary slit per curve (zero-capacity slits are
    /// skipped) and installs the SDE-updated driving positions as the new
    /// tips.  Within a step the slit centers are pushed forward through the
    /// maps already applied; the application order alternates with step
    /// parity so the ordering commutator error cancels pairwise.
    void advance(std::span<const double> dq, std::span<const double> new_positions) {
        const std::size_t m = tips_.size();
        if (dq.size() != m || new_positions.size() != m)
            throw std::domain_error("slit_step: arity mismatch");
        double dq_total = 0.0;
        for (double q : dq) {
            if (q < 0.0) throw std::domain_error("slit_step: negative capacity increment");
            dq_total += q;
        }
        for (std::size_t i = 0; i + 1 < m; ++i)
            if (!(new_positions[i] < new_positions[i + 1]))
                throw step_rejected("slit_step: proposed driving positions cross");

        if (record_journal_) {
            std::vector<double> centers(tips_.begin(), tips_.end());
            const bool forward = steps_ % 2 == 0;
            for (std::size_t idx = 0; idx < m; ++idx) {
                const std::size_t a = forward ? idx : m - 1 - idx;
                if (dq[a] == 0.0) continue;
                journal_.push_back({steps_, static_cast<int>(a) + 1, centers[a], dq[a], time_});
                for (std::size_t b = 0; b < m; ++b)
                    if (b != a) centers[b] = slit_map_real(centers[b], centers[a], dq[a]);
            }
        }
        for (std::size_t a = 0; a < m; ++a) capacity_[a] += dq[a];
        for (std::size_t i = 0; i < m; ++i) tips_[i] = new_positions[i];
        time_ += m > 0 ? dq_total / static_cast<double>(m) : 0.0;
        ++steps_;
    }

private:
    std::vector<double> tips_;
    std::vector<std::vector<double>> lie_;
    std::vector<double> capacity_;
    double time_{0.0};
    long steps_{0};
    bool record_journal_;
    std::vector<JournalRecord> journal_;
};

/// Value-returning form of LoewnerState::advance.
inline LoewnerState slit_step(LoewnerState state, std::span<const double> dq,
                              std::span<const double> new_positions) {
    state.advance(dq, new_positions);
    return state;
}

/// g_t(z): the journal composition applied to z, Im z > 0.  Displacements
/// are accumulated with compensated summation so the O(1/z) hydrodynamic
/// tail survives long compositions at large |z|.
inline std::complex<double> evaluate_map(const LoewnerState& state, std::complex<double> z,
                                         double safety_margin = 0.0) {
    if (!state.records_journal())
        throw std::logic_error("evaluate_map: journal recording is disabled for this state");
    if (!(z.imag() > safety_margin))
        throw std::domain_error("evaluate_map: point not above the hull safety margin");
    std::complex<double> acc{0.0, 0.0}, comp{0.0, 0.0};
    for (const auto& rec : state.journal()) {
        const std::complex<double> d = slit_displacement(z + acc, rec.center, rec.dq);
        const std::complex<double> y = d - comp;
        const std::complex<double> t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return z + acc;
}

/// |g(z) - z - 2Q/z|: residual of the hydrodynamic normalization.
inline double hydrodynamic_residual(const LoewnerState& state, std::complex<double> z) {
    const std::complex<double> g = evaluate_map(state, z);
    return std::abs(g - z - 2.0 * state.total_capacity() / z);
}

/// Closest adjacent tip pair with gap below epsilon, if any.
inline std::optional<CollisionEvent> collision_check(const LoewnerState& state, double epsilon) {
    if (!(epsilon > 0.0)) throw std::domain_error("collision_check: epsilon must be positive");
    const auto& x = state.tips();
    std::optional<CollisionEvent> best;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double gap = x[i + 1] - x[i];
        if (gap < epsilon && (!best || gap < best->gap))
            best = CollisionEvent{static_cast<int>(i) + 1, static_cast<int>(i) + 2, state.time(),
                                  gap};
    }
    return best;
}

/// CSV journal export: step, alpha, x_alpha, dq, t.
inline void write_journal_csv(const LoewnerState& state, std::ostream& os) {
    os << "step,alpha,x_alpha,dq,t\n";
    for (const auto& rec : state.journal()) {
        char line[160];
        std::snprintf(line, sizeof line, "%ld,%d,%.17g,%.17g,%.17g\n", rec.step, rec.alpha,
                      rec.center, rec.dq, rec.t);
        os << line;
    }
}

}  // namespace cosetsle
