#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cosetsle/errors.hpp"

namespace cosetsle {

// ---------------------------------------------------------------------------
// Gauss hypergeometric function 2F1(a,b;c;x) on [0,1)
// ---------------------------------------------------------------------------

namespace detail {

inline bool near_nonpositive_integer(double x, double tol = 1e-12) {
    return x <= tol && std::abs(x - std::round(x)) <= tol;
}

struct SignedLogGamma {
    double log;
    int sign;  // 0 at a pole
};

inline SignedLogGamma lgamma_signed(double x) {
    if (near_nonpositive_integer(x)) return {0.0, 0};
    if (x > 0) return {std::lgamma(x), 1};
    // Gamma alternates sign on (-k-1,-k)
    const double k = -std::floor(x);
    const int sign = (static_cast<long long>(k) % 2 == 1) ? -1 : 1;
    return {std::lgamma(x), sign};
}

/// Gauss series sum_{k} (a)_k (b)_k / ((c)_k k!) x^k.  Terminates when a or
/// b is a nonpositive integer.
inline double hyp2f1_series(double a, double b, double c, double x,
                            long max_terms = 2000000) {
    double term = 1.0, sum = 1.0, comp = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    int small_streak = 0;
    for (long k = 0; k < max_terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (term == 0.0) return sum;  // terminating series
        small_streak = std::abs(term) <= eps * std::abs(sum) ? small_streak + 1 : 0;
        if (small_streak >= 2) return sum;
    }
    throw numeric_error("hyp2f1: series did not converge", sum, term);
}

}  // namespace detail

/// 2F1(a,b;c;x) for 0 <= x < 1, relative accuracy ~1e-13.  Raw series for
/// x <= 1/2; the x -> 1-x connection formula above (both pieces are again
/// fast Gauss series), with the Euler transformation as fallback when
/// c-a-b is too close to an integer for the connection coefficients.
inline double hyp2f1(double a, double b, double c, double x) {
    using namespace detail;
    if (near_nonpositive_integer(c)) throw std::domain_error("hyp2f1: c is a nonpositive integer");
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("hyp2f1: x outside [0,1)");
    if (x == 0.0) return 1.0;
    if (a == 0.0 || b == 0.0) return 1.0;
    if (near_nonpositive_integer(a) || near_nonpositive_integer(b) || x <= 0.5)
        return hyp2f1_series(a, b, c, x);

    const double s = c - a - b;
    if (std::abs(s - std::round(s)) > 1e-8) {
        const auto lc = lgamma_signed(c);
        const auto ls = lgamma_signed(s);
        const auto lca = lgamma_signed(c - a);
        const auto lcb = lgamma_signed(c - b);
        const auto lms = lgamma_signed(-s);
        const auto la = lgamma_signed(a);
        const auto lb = lgamma_signed(b);
        double first = 0.0, second = 0.0;
        if (lca.sign != 0 && lcb.sign != 0) {
            const double coeff = lc.sign * ls.sign * lca.sign * lcb.sign *
                                 std::exp(lc.log + ls.log - lca.log - lcb.log);
            first = coeff * hyp2f1_series(a, b, 1.0 - s, 1.0 - x);
        }
        if (la.sign != 0 && lb.sign != 0) {
            const double coeff = lc.sign * lms.sign * la.sign * lb.sign *
                                 std::exp(lc.log + lms.log - la.log - lb.log);
            second = coeff * std::pow(1.0 - x, s) * hyp2f1_series(c - a, c - b, 1.0 + s, 1.0 - x);
        }
        return first + second;
    }
    // Euler transformation; the transformed series converges (slowly) up to
    // x = 1 whenever c-a-b < 0, which is the regime our callers hit.
    return std::pow(1.0 - x, s) * hyp2f1_series(c - a, c - b, c, x, 50000000);
}

// ---------------------------------------------------------------------------
// Gauss-Jacobi quadrature for weight (1-t)^alpha (1+t)^beta on [-1,1]
// ---------------------------------------------------------------------------

struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing, in (-1,1)
    std::vector<double> weights;  // positive
    double alpha{0.0};
    double beta{0.0};
};

namespace detail {

// Sturm count: eigenvalues of the symmetric tridiagonal (diag, offdiag^2)
// strictly below x.
inline int sturm_count(const std::vector<double>& diag, const std::vector<double>& off2,
                       double x) {
    const double tiny = 1e-300;
    double d = diag[0] - x;
    int cnt = d < 0.0;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        if (d == 0.0) d = tiny;
        d = diag[i] - x - off2[i] / d;
        cnt += d < 0.0;
    }
    return cnt;
}

}  // namespace detail

/// Golub-Welsch construction: nodes are the eigenvalues of the Jacobi
/// matrix (found by Sturm bisection), weights are the Christoffel numbers
/// 1 / sum_k p_k(x)^2 over the orthonormal polynomials.
inline QuadratureRule gauss_jacobi(double alpha, double beta, int m) {
    if (!(alpha > -1.0) || !(beta > -1.0))
        throw std::domain_error("gauss_jacobi: alpha and beta must exceed -1");
    if (m < 1) throw std::domain_error("gauss_jacobi: node count must be >= 1");

    const double ab = alpha + beta;
    std::vector<double> diag(static_cast<std::size_t>(m)), off2(static_cast<std::size_t>(m), 0.0);
    diag[0] = (beta - alpha) / (ab + 2.0);
    for (int k = 1; k < m; ++k) {
        const double t = 2.0 * k + ab;
        diag[static_cast<std::size_t>(k)] = (beta * beta - alpha * alpha) / (t * (t + 2.0));
        off2[static_cast<std::size_t>(k)] =
            k == 1 ? 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
                   : 4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
                         (t * t * (t + 1.0) * (t - 1.0));
    }
    const double mu0 =
        std::pow(2.0, ab + 1.0) *
        std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));

    QuadratureRule rule;
    rule.alpha = alpha;
    rule.beta = beta;
    rule.nodes.resize(static_cast<std::size_t>(m));
    rule.weights.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        double lo = -1.0, hi = 1.0;
        for (int it = 0; it < 100 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon();
             ++it) {
            const double mid = 0.5 * (lo + hi);
            if (detail::sturm_count(diag, off2, mid) <= j)
                lo = mid;
            else
                hi = mid;
        }
        const double xj = 0.5 * (lo + hi);
        // orthonormal-polynomial recurrence for the Christoffel number
        double pm = 0.0, p = 1.0 / std::sqrt(mu0), ssum = p * p;
        for (int k = 0; k + 1 < m; ++k) {
            const double bk1 = std::sqrt(off2[static_cast<std::size_t>(k + 1)]);
            const double pn =
                ((xj - diag[static_cast<std::size_t>(k)]) * p -
                 (k > 0 ? std::sqrt(off2[static_cast<std::size_t>(k)]) : 0.0) * pm) /
                bk1;
            pm = p;
            p = pn;
            ssum += p * p;
        }
        rule.nodes[static_cast<std::size_t>(j)] = xj;
        rule.weights[static_cast<std::size_t>(j)] = 1.0 / ssum;
    }
    return rule;
}

/// Applies a rule mapped to [lo,hi] to a plain integrand (alpha=beta=0 case).
template <class F>
double integrate_mapped(const QuadratureRule& rule, double lo, double hi, F&& f) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

// ---------------------------------------------------------------------------
// Regularized Dotsenko-Fateev double integral
// ---------------------------------------------------------------------------

/// Cutoff regularization of the conformal-block double integral: the
/// u,v -> 1 endpoint is non-integrable, so integration starts at 1 +
/// cutoff_epsilon and the unbounded v range is truncated at v_max.  Raw
/// values are cutoff-dependent; only probability ratios are physical.
struct DFConfig {
    double cutoff_epsilon{1e-8};
    double v_max{1e4};
    int nodes_per_axis{48};

    void validate() const {
        if (!(cutoff_epsilon > 0.0 && cutoff_epsilon < 1.0))
            throw std::domain_error("DFConfig: cutoff_epsilon outside (0,1)");
        if (!(v_max > 1.0 + cutoff_epsilon))
            throw std::domain_error("DFConfig: v_max must exceed 1 + cutoff_epsilon");
        if (nodes_per_axis < 4) throw std::domain_error("DFConfig: nodes_per_axis too small");
    }
};

namespace detail {

// Six-term interaction kernel; um1 = u-1, vm1 = v-1 are kept explicit so
// the cutoff layer (um1 ~ epsilon) suffers no cancellation.
inline double df_kernel(double um1, double vm1, double x) {
    const double u = 1.0 + um1, v = 1.0 + vm1;
    const double ux = um1 + (1.0 - x), vx = vm1 + (1.0 - x);
    return 1.0 / (vx * um1) + 1.0 / (vm1 * ux) + 1.0 / (v * um1) + 1.0 / (vm1 * u) +
           1.0 / (v * ux) + 1.0 / (vx * u);
}

// Power-law prefactor of one integration variable: t^-s |1-t|^-s (t-x)^-s.
inline double df_axis_factor(double tm1, double x, double s) {
    const double t = 1.0 + tm1, tx = tm1 + (1.0 - x);
    return std::pow(t * tm1 * tx, -s);
}

inline double df_raw_integral(int n, double x, double eps, double vmax, int m) {
    const double s = 2.0 / (n + 2.0);
    const QuadratureRule gl = gauss_jacobi(0.0, 0.0, m);
    const QuadratureRule gj = gauss_jacobi(s, 0.0, m);

    const double Y = std::log((vmax - 1.0) / eps);
    double total = 0.0;
    for (std::size_t iv = 0; iv < gl.nodes.size(); ++iv) {
        const double y = 0.5 * Y * (1.0 + gl.nodes[iv]);
        const double vm1 = eps * std::exp(y);
        const double wv = 0.5 * Y * gl.weights[iv] * vm1;  // log-grading jacobian
        const double bv = df_axis_factor(vm1, x, s);

        // inner u-integral over [eps, vm1] in um1, split at the midpoint:
        // log-graded piece toward the cutoff, Gauss-Jacobi piece absorbing
        // the (v-u)^s branch point at u = v.
        const double umc = 0.5 * (eps + vm1);
        double inner = 0.0;
        if (umc > eps) {
            const double W = std::log(umc / eps);
            for (std::size_t iu = 0; iu < gl.nodes.size(); ++iu) {
                const double w = 0.5 * W * (1.0 + gl.nodes[iu]);
                const double um1 = eps * std::exp(w);
                const double ju = 0.5 * W * gl.weights[iu] * um1;
                inner += ju * df_axis_factor(um1, x, s) * std::pow(vm1 - um1, s) *
                         df_kernel(um1, vm1, x);
            }
        }
        {
            const double half = 0.5 * (vm1 - umc);
            if (half > 0.0) {
                const double mid = 0.5 * (vm1 + umc);
                double gjsum = 0.0;
                for (std::size_t iu = 0; iu < gj.nodes.size(); ++iu) {
                    const double um1 = mid + half * gj.nodes[iu];
                    gjsum += gj.weights[iu] * df_axis_factor(um1, x, s) *
                             df_kernel(um1, vm1, x);
                }
                inner += std::pow(half, 1.0 + s) * gjsum;
            }
        }
        total += wv * bv * inner;
    }
    return total;
}

}  // namespace detail

/// Z_C2-type block for the Z(n) family: x^{2/(n+2)} (1-x)^{2/(n+2)} times
/// the cutoff-regularized double integral.  Deterministic for a fixed
/// configuration.
inline double df_block(int n, double x, const DFConfig& cfg) {
    if (n < 4) throw std::domain_error("df_block: requires level n >= 4");
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("df_block: x outside (0,1)");
    cfg.validate();
    const double s = 2.0 / (n + 2.0);
    return std::pow(x * (1.0 - x), s) *
           detail::df_raw_integral(n, x, cfg.cutoff_epsilon, cfg.v_max, cfg.nodes_per_axis);
}

struct DFRefinement {
    double value;    // at nodes_per_axis
    double refined;  // at 2 * nodes_per_axis
    double rel_diff() const {
        return std::abs(value - refined) / std::max(std::abs(refined), 1e-300);
    }
};

/// Evaluates at m and 2m nodes per axis; the pair is the convergence
/// diagnostic callers report.
inline DFRefinement df_block_refined(int n, double x, const DFConfig& cfg) {
    DFRefinement r{};
    r.value = df_block(n, x, cfg);
    DFConfig fine = cfg;
    fine.nodes_per_axis = 2 * cfg.nodes_per_axis;
    r.refined = df_block(n, x, fine);
    return r;
}

/// Refinement-checked evaluation; throws numeric_error carrying both
/// estimates when node doubling moves the value by more than rel_tol.
inline double df_block_checked(int n, double x, const DFConfig& cfg, double rel_tol = 1e-5) {
    const DFRefinement r = df_block_refined(n, x, cfg);
    if (r.rel_diff() > rel_tol)
        throw numeric_error("df_block: quadrature not converged under node doubling", r.value,
                            r.refined);
    return r.refined;
}

// ---------------------------------------------------------------------------
// Natural cubic spline (drift-table interpolation)
// ---------------------------------------------------------------------------

class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> xs, std::vector<double> ys)
        : x_(std::move(xs)), y_(std::move(ys)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw std::domain_error("CubicSpline: need >= 3 points");
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
        m_.assign(n, 0.0);
        b[0] = b[n - 1] = 1.0;  // natural boundary
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
            a[i] = hl / 6.0;
            b[i] = (hl + hr) / 3.0;
            c[i] = hr / 6.0;
            r[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
        }
        for (std::size_t i = 1; i < n; ++i) {  // Thomas elimination
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        m_[n - 1] = r[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (r[i] - c[i] * m_[i + 1]) / b[i];
    }

    /// Evaluates the spline; arguments outside the grid are clamped.
    double operator()(double x) const {
        if (x <= x_.front()) x = x_.front();
        if (x >= x_.back()) x = x_.back();
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t i = std::min(x_.size() - 2,
                                       static_cast<std::size_t>(
                                           std::max<std::ptrdiff_t>(0, it - x_.begin() - 1)));
        const double h = x_[i + 1] - x_[i];
        const double t = (x_[i + 1] - x) / h, u = (x - x_[i]) / h;
        return t * y_[i] + u * y_[i + 1] +
               ((t * t * t - t) * m_[i] + (u * u * u - u) * m_[i + 1]) * h * h / 6.0;
    }

    double min_x() const { return x_.front(); }
    double max_x() const { return x_.back(); }

private:
    std::vector<double> x_, y_, m_;  // m_: second derivatives
};

}  // namespace cosetsle
