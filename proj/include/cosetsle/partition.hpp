#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "cosetsle/algebra.hpp"
#include "cosetsle/numerics.hpp"

namespace cosetsle {

// ---------------------------------------------------------------------------
// 2-SLE channel data
// ---------------------------------------------------------------------------

/// Fusion channel of the boundary field at infinity for two curves.
/// Middle is the channel excluded as unphysical for spin-cluster
/// boundaries ("two curves fuse and run to infinity"); it stays
/// constructible behind the allow_unphysical flag for research use.
enum class TwoSleChannel { Identity, Fused, Middle };

struct ChannelWeights {
    Rational h_lambda;  // weight of the fused boundary field
    Rational delta;     // h_lambda - 2 h_bcc
};

inline ChannelWeights channel_weights(const CosetModel& m, TwoSleChannel ch,
                                      bool allow_unphysical = false) {
    Rational h;
    switch (ch) {
        case TwoSleChannel::Identity: h = Rational(0); break;
        case TwoSleChannel::Fused: h = m.h_fused; break;
        case TwoSleChannel::Middle:
            if (!allow_unphysical)
                throw std::domain_error(
                    "channel_weights: middle channel is unphysical for cluster boundaries; "
                    "pass allow_unphysical to construct it anyway");
            h = m.family == ModelFamily::Parafermion
                    ? parafermion_weight(m.level, 2, 0)
                    : m.h_bcc;
            break;
    }
    return {h, h - m.h_bcc - m.h_bcc};
}

inline double two_sle_delta(double h_lambda3, double h_bcc) { return h_lambda3 - 2.0 * h_bcc; }
inline Rational two_sle_delta(const Rational& h_lambda3, const Rational& h_bcc) {
    return h_lambda3 - h_bcc - h_bcc;
}

/// Kac weight h_{1,2}(kappa) = (6-kappa)/(2 kappa) of the driving
/// parameter.  This is the weight the multi-point position prefactor must
/// carry for channel-probability ratios to be martingales of the flow; for
/// coset models it differs from the bcc operator's conformal weight.
inline double kac_h12(double kappa) { return (6.0 - kappa) / (2.0 * kappa); }
inline Rational kac_h12(const Rational& kappa) {
    return (Rational(6) - kappa) / (Rational(2) * kappa);
}

/// Two-point pure partition function (x1 - x2)^delta, sign convention
/// x1 > x2.
inline double two_sle_Z(double delta, double x1, double x2) {
    if (x1 == x2) throw std::domain_error("two_sle_Z: coincident points");
    if (!(x1 > x2)) throw std::domain_error("two_sle_Z: requires x1 > x2");
    return std::pow(x1 - x2, delta);
}

/// Unique three-point pure partition function of the h_(3,0) sector,
/// [(x2-x1)(x3-x1)(x3-x2)]^{2/(n+2)} for x1 < x2 < x3.
inline double three_sle_Z(int n, double x1, double x2, double x3) {
    if (n < 4) throw std::domain_error("three_sle_Z: requires level n >= 4");
    if (!(x1 < x2 && x2 < x3))
        throw std::domain_error("three_sle_Z: positions must be strictly increasing");
    return std::pow((x2 - x1) * (x3 - x1) * (x3 - x2), 2.0 / (n + 2.0));
}

/// Cross ratio x = f(x2) of four ordered boundary points with
/// f(z) = (z-x1)(x3-x4)/((z-x4)(x3-x1)); f maps (x1,x3,x4) to (0,1,inf).
/// x4 may be +infinity.
inline double cross_ratio(double x1, double x2, double x3,
                          double x4 = std::numeric_limits<double>::infinity()) {
    const bool x4_inf = std::isinf(x4);
    if (!(x1 < x2 && x2 < x3 && (x4_inf || x3 < x4)))
        throw std::domain_error("cross_ratio: points must be ordered and distinct");
    const double x = x4_inf ? (x2 - x1) / (x3 - x1)
                            : (x2 - x1) * (x3 - x4) / ((x2 - x4) * (x3 - x1));
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("cross_ratio: degenerate configuration");
    return x;
}

// ---------------------------------------------------------------------------
// Channel blocks of the four-point sector
// ---------------------------------------------------------------------------

/// Z_C2(x): the channel block whose x->0 behavior is x^{h_fused - 2 h_bcc}.
/// SU2k: closed hypergeometric form x^b (1-x)^b 2F1((k+3)/(k+2), 3/(k+2);
/// (k+4)/(k+2); x) with b = 1/(2(k+2)).  Parafermion: the regularized
/// Dotsenko-Fateev integral (trusted for x <= 1/2; the crossing layer pairs
/// x with 1-x so only ratios of the two are consumed).
inline double block_C2(const CosetModel& m, double x, const DFConfig& cfg = {}) {
    if (m.family == ModelFamily::SU2k && x == 0.0) return 0.0;  // vanishing prefactor
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("block_C2: x outside (0,1)");
    if (m.family == ModelFamily::SU2k) {
        const double k = m.level;
        const double b = 1.0 / (2.0 * (k + 2.0));
        return std::pow(x * (1.0 - x), b) *
               hyp2f1((k + 3.0) / (k + 2.0), 3.0 / (k + 2.0), (k + 4.0) / (k + 2.0), x);
    }
    return df_block(m.level, x, cfg);
}

/// d/dx of block_C2.  Analytic contiguous relation for SU2k, central
/// difference for the DF evaluator.
inline double block_C2_prime(const CosetModel& m, double x, const DFConfig& cfg = {}) {
    if (m.family == ModelFamily::SU2k) {
        const double k = m.level;
        const double b = 1.0 / (2.0 * (k + 2.0));
        const double a1 = (k + 3.0) / (k + 2.0), b1 = 3.0 / (k + 2.0), c1 = (k + 4.0) / (k + 2.0);
        const double F = hyp2f1(a1, b1, c1, x);
        const double Fp = a1 * b1 / c1 * hyp2f1(a1 + 1.0, b1 + 1.0, c1 + 1.0, x);
        return std::pow(x * (1.0 - x), b) * ((b / x - b / (1.0 - x)) * F + Fp);
    }
    const double h = 1e-5 * std::min(x, 1.0 - x);
    return (df_block(m.level, x + h, cfg) - df_block(m.level, x - h, cfg)) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// Internal (Lie) structure and generator insertions
// ---------------------------------------------------------------------------

/// Coordinates of a tensor in the product of the per-curve irrep spaces.
struct InternalTensor {
    std::vector<int> dims;
    std::vector<std::complex<double>> c;

    std::size_t size() const { return c.size(); }
};

/// Product of zero-weight states |j,0> (requires every j even).
inline InternalTensor zero_weight_product(const std::vector<IrrepAction>& irreps) {
    InternalTensor t;
    std::size_t total = 1;
    for (const auto& rep : irreps) {
        if (rep.j % 2 != 0)
            throw std::domain_error("zero_weight_product: odd j has no zero-weight state");
        t.dims.push_back(rep.dim());
        total *= static_cast<std::size_t>(rep.dim());
    }
    t.c.assign(total, 0.0);
    std::size_t idx = 0;
    for (const auto& rep : irreps) idx = idx * static_cast<std::size_t>(rep.dim()) +
                                         static_cast<std::size_t>(rep.j / 2);
    t.c[idx] = 1.0;
    return t;
}

/// Singlet (epsilon) tensor of two spin-1/2 irreps.
inline InternalTensor epsilon_pair() {
    InternalTensor t;
    t.dims = {2, 2};
    t.c = {0.0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0};
    return t;
}

struct InsertionAction {
    bool scalar{false};     // true iff t^a maps the tensor onto its own line
    double scalar_ratio{0.0};  // projection <T, t^a T> / <T, T>
    std::vector<std::complex<double>> action;  // full coordinates of t^a T
};

/// Applies the generator t^a of curve beta's irrep to the internal tensor.
inline InsertionAction apply_generator(const InternalTensor& t,
                                       const std::vector<IrrepAction>& irreps, int a, int beta) {
    if (irreps.size() != t.dims.size() || beta < 0 ||
        beta >= static_cast<int>(irreps.size()) || a < 1 || a > 3)
        throw std::domain_error("apply_generator: index out of range");
    const auto& rep = irreps[static_cast<std::size_t>(beta)];
    if (rep.dim() != t.dims[static_cast<std::size_t>(beta)])
        throw std::domain_error("apply_generator: irrep/tensor dimension mismatch");
    const CMatrix& g = rep.generators[static_cast<std::size_t>(a - 1)];

    std::size_t stride = 1;
    for (std::size_t s = t.dims.size(); s-- > static_cast<std::size_t>(beta) + 1;)
        stride *= static_cast<std::size_t>(t.dims[s]);
    const auto dim = static_cast<std::size_t>(rep.dim());

    InsertionAction out;
    out.action.assign(t.c.size(), 0.0);
    for (std::size_t base = 0; base < t.c.size(); ++base) {
        const std::size_t slot = (base / stride) % dim;
        const std::size_t lead = base - slot * stride;
        std::complex<double> acc = 0.0;
        for (std::size_t col = 0; col < dim; ++col)
            acc += g.at(static_cast<int>(slot), static_cast<int>(col)) *
                   t.c[lead + col * stride];
        out.action[base] = acc;
    }

    std::complex<double> dot = 0.0;
    double norm2 = 0.0, residual2 = 0.0;
    for (std::size_t i = 0; i < t.c.size(); ++i) {
        dot += std::conj(t.c[i]) * out.action[i];
        norm2 += std::norm(t.c[i]);
    }
    out.scalar_ratio = dot.real() / norm2;  // Hermitian generators: real projection
    for (std::size_t i = 0; i < t.c.size(); ++i)
        residual2 += std::norm(out.action[i] - out.scalar_ratio * t.c[i]);
    out.scalar = residual2 <= 1e-24 * std::max(1.0, norm2);
    return out;
}

// ---------------------------------------------------------------------------
// PurePartition
// ---------------------------------------------------------------------------

/// Evaluable pure partition function.  Three kinds cover the artifact:
///   TwoSle          Z = (x2-x1)^delta            (2 positions)
///   ThreeSleUnique  the h_(3,0) triple product    (3 positions)
///   FourPointSum    Z = (x3-x1)^{-2h} [Z_C1+Z_C2](x), x4 = infinity
///                   (3 positions; the conjectural two-channel ansatz)
/// Values are defined up to overall normalization; drifts consume only
/// log-gradients, where the normalization drops out.
class PurePartition {
public:
    struct Constant {
        int m;  // arity; Z = 1, no interaction drift
    };
    struct TwoSle {
        double delta;
    };
    struct ThreeSleUnique {
        int n;
    };
    struct FourPointSum {
        CosetModel model;
        DFConfig df;
    };

    static PurePartition constant(int arity) {
        if (arity < 1) throw std::domain_error("PurePartition: arity must be >= 1");
        PurePartition z;
        z.kind_ = Constant{arity};
        return z;
    }

    static PurePartition two_sle(const CosetModel& m, TwoSleChannel ch,
                                 bool allow_unphysical = false) {
        PurePartition z;
        const ChannelWeights w = channel_weights(m, ch, allow_unphysical);
        z.kind_ = TwoSle{w.delta.to_double()};
        z.h_bcc_ = m.h_bcc.to_double();
        z.h_end_ = w.h_lambda.to_double();
        return z;
    }
    static PurePartition two_sle_with_delta(double delta) {
        PurePartition z;
        z.kind_ = TwoSle{delta};
        return z;
    }
    static PurePartition three_sle_unique(int n) {
        if (n < 4) throw std::domain_error("PurePartition: unique 3-SLE Z requires n >= 4");
        PurePartition z;
        z.kind_ = ThreeSleUnique{n};
        z.h_bcc_ = parafermion_weight(n, 2, 0).to_double();
        z.h_end_ = parafermion_weight(n, 6, 0).to_double();
        return z;
    }
    static PurePartition four_point_sum(const CosetModel& m, DFConfig df = {}) {
        PurePartition z;
        z.kind_ = FourPointSum{m, df};
        z.h_bcc_ = m.h_bcc.to_double();
        z.h_end_ = m.h_bcc.to_double();  // lambda_4 in the h_(1,0)-type sector
        z.h_pref_ = kac_h12(m.kappa_d());
        return z;
    }

    int arity() const {
        if (const auto* c = std::get_if<Constant>(&kind_)) return c->m;
        if (std::holds_alternative<TwoSle>(kind_)) return 2;
        return 3;
    }

    bool is_four_point() const { return std::holds_alternative<FourPointSum>(kind_); }
    const FourPointSum* four_point() const { return std::get_if<FourPointSum>(&kind_); }
    const TwoSle* two_sle_kind() const { return std::get_if<TwoSle>(&kind_); }

    double h_bcc() const { return h_bcc_; }
    double h_end() const { return h_end_; }

    double value(std::span<const double> xs) const {
        check_positions(xs);
        if (std::holds_alternative<Constant>(kind_)) return 1.0;
        if (const auto* two = std::get_if<TwoSle>(&kind_))
            return std::pow(xs[1] - xs[0], two->delta);
        if (const auto* three = std::get_if<ThreeSleUnique>(&kind_))
            return three_sle_Z(three->n, xs[0], xs[1], xs[2]);
        const auto& fp = std::get<FourPointSum>(kind_);
        const double x = (xs[1] - xs[0]) / (xs[2] - xs[0]);
        return std::pow(xs[2] - xs[0], -2.0 * h_pref_) *
               (block_C2(fp.model, x, fp.df) + block_C2(fp.model, 1.0 - x, fp.df));
    }

    /// d log Z / d x_alpha.  Closed forms for the first two kinds; the
    /// four-point kind differentiates the cross-ratio factor by central
    /// differences with step 1e-5 * local scale.
    std::vector<double> log_gradient(std::span<const double> xs) const {
        check_positions(xs);
        if (std::holds_alternative<Constant>(kind_))
            return std::vector<double>(xs.size(), 0.0);
        if (const auto* two = std::get_if<TwoSle>(&kind_)) {
            const double g = two->delta / (xs[0] - xs[1]);
            return {g, -g};
        }
        if (const auto* three = std::get_if<ThreeSleUnique>(&kind_)) {
            const double s = 2.0 / (three->n + 2.0);
            const double d21 = xs[1] - xs[0], d31 = xs[2] - xs[0], d32 = xs[2] - xs[1];
            return {s * (-1.0 / d21 - 1.0 / d31), s * (1.0 / d21 - 1.0 / d32),
                    s * (1.0 / d31 + 1.0 / d32)};
        }
        const auto& fp = std::get<FourPointSum>(kind_);
        const double den = xs[2] - xs[0];
        const double x = (xs[1] - xs[0]) / den;
        const double w = log_sum_derivative(fp, x);
        const std::array<double, 3> dx = {-(xs[2] - xs[1]) / (den * den), 1.0 / den,
                                          -(xs[1] - xs[0]) / (den * den)};
        // d/dx_alpha of the -2 h_{1,2} log(x3-x1) prefactor is -/+ on the
        // outer positions
        const double pref = 2.0 * h_pref_ / den;
        return {pref + w * dx[0], w * dx[1], -pref + w * dx[2]};
    }

    const std::optional<InternalTensor>& internal() const { return internal_; }
    void set_internal(InternalTensor t) { internal_ = std::move(t); }

private:
    static double log_sum_derivative(const FourPointSum& fp, double x) {
        const double h = 1e-5 * std::min(x, 1.0 - x);
        const auto logZ = [&](double xx) {
            return std::log(block_C2(fp.model, xx, fp.df) + block_C2(fp.model, 1.0 - xx, fp.df));
        };
        return (logZ(x + h) - logZ(x - h)) / (2.0 * h);
    }

    static void check_positions(std::span<const double> xs) {
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            if (xs[i] == xs[i + 1]) throw std::domain_error("PurePartition: coincident positions");
            if (xs[i] > xs[i + 1])
                throw std::domain_error("PurePartition: positions must be strictly increasing");
        }
    }

    std::variant<Constant, TwoSle, ThreeSleUnique, FourPointSum> kind_{TwoSle{0.0}};
    double h_bcc_{0.0};
    double h_end_{0.0};
    double h_pref_{0.0};  // prefactor weight h_{1,2}(kappa) of the 4-point kind
    std::optional<InternalTensor> internal_;
};

/// Free-function form of the log-gradient, matching the module operation
/// table.
inline std::vector<double> log_Z_gradient(const PurePartition& z,
                                          std::span<const double> positions) {
    if (static_cast<int>(positions.size()) != z.arity())
        throw std::domain_error("log_Z_gradient: wrong number of positions");
    return z.log_gradient(positions);
}

/// Generator-insertion ratio (t^a_{lambda_beta} Z)/Z.  The internal factor
/// of every supported Z is position-independent, so the ratio reduces to
/// the action on the internal tensor (by default the zero-weight product
/// of the supplied irreps).
inline InsertionAction insertion_ratio(const PurePartition& z,
                                       const std::vector<IrrepAction>& irreps,
                                       std::span<const double> positions, int a, int beta) {
    if (static_cast<int>(positions.size()) != z.arity() ||
        irreps.size() != positions.size())
        throw std::domain_error("insertion_ratio: irreps/positions arity mismatch");
    const InternalTensor tensor =
        z.internal() ? *z.internal() : zero_weight_product(irreps);
    return apply_generator(tensor, irreps, a, beta);
}

// ---------------------------------------------------------------------------
// Cross-ratio drift table
// ---------------------------------------------------------------------------

/// W(x) = d/dx log(Z_C1 + Z_C2) precomputed on a logit-spaced grid for the
/// 3-SLE Monte Carlo hot loop.  The splined quantity is W * x(1-x), which
/// stays bounded through both endpoints.
class CrossRatioDrift {
public:
    CrossRatioDrift(const CosetModel& model, const DFConfig& cfg = {}, int grid_points = 1601,
                    double logit_max = 16.0)
        : model_(model), cfg_(cfg) {
        std::vector<double> ts(static_cast<std::size_t>(grid_points));
        std::vector<double> vals(static_cast<std::size_t>(grid_points));
        for (int i = 0; i < grid_points; ++i) {
            const double t = -logit_max + 2.0 * logit_max * i / (grid_points - 1.0);
            const double x = 1.0 / (1.0 + std::exp(-t));
            ts[static_cast<std::size_t>(i)] = t;
            vals[static_cast<std::size_t>(i)] = w_direct(x) * x * (1.0 - x);
        }
        spline_ = CubicSpline(std::move(ts), std::move(vals));
    }

    double operator()(double x) const {
        const double t = std::log(x / (1.0 - x));
        return spline_(t) / (x * (1.0 - x));
    }

    /// Unsplined evaluation (analytic derivative for SU2k, central
    /// difference on the DF block).
    double w_direct(double x) const {
        if (model_.family == ModelFamily::SU2k) {
            const double num = block_C2_prime(model_, x, cfg_) -
                               block_C2_prime(model_, 1.0 - x, cfg_);
            const double den = block_C2(model_, x, cfg_) + block_C2(model_, 1.0 - x, cfg_);
            return num / den;
        }
        const double h = 1e-5 * std::min(x, 1.0 - x);
        const auto logZ = [&](double xx) {
            return std::log(block_C2(model_, xx, cfg_) + block_C2(model_, 1.0 - xx, cfg_));
        };
        return (logZ(x + h) - logZ(x - h)) / (2.0 * h);
    }

    const CosetModel& model() const { return model_; }

private:
    CosetModel model_;
    DFConfig cfg_;
    CubicSpline spline_;
};

}  // namespace cosetsle
