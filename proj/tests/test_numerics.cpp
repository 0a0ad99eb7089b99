#include <catch2/catch.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "cosetsle/numerics.hpp"

using namespace cosetsle;

namespace {

// independent oracle: the defining series summed to machine convergence in
// extended precision
long double series_oracle(long double a, long double b, long double c, long double x) {
    long double term = 1.0L, sum = 1.0L;
    for (long k = 0; k < 4000000; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0L)) * x;
        sum += term;
        if (std::abs(term) <= 1e-21L * std::abs(sum)) break;
    }
    return sum;
}

// closed-form Jacobi moments: int (1-t)^a (1+t)^b t^k dt via the binomial
// expansion of t^k = ((1+t)-1)^k
long double jacobi_moment(long double a, long double b, long double k_pow, int k) {
    (void)k_pow;
    long double sum = 0.0L;
    for (int j = 0; j <= k; ++j) {
        long double binom = 1.0L;
        for (int i = 0; i < j; ++i) binom = binom * (k - i) / (i + 1.0L);
        const long double sign = (k - j) % 2 == 0 ? 1.0L : -1.0L;
        const long double beta_int =
            std::exp(std::lgamma(a + 1.0L) + std::lgamma(b + j + 1.0L) -
                     std::lgamma(a + b + j + 2.0L));
        sum += sign * binom * std::pow(2.0L, a + b + j + 1.0L) * beta_int;
    }
    return sum;
}

}  // namespace

TEST_CASE("hyp2f1 basics") {
    CHECK(hyp2f1(0.7, 1.3, 2.1, 0.0) == 1.0);
    CHECK(hyp2f1(0.0, 5.0, 2.0, 0.7) == 1.0);
    // 2F1(1,1;2;x) = -log(1-x)/x
    CHECK(hyp2f1(1.0, 1.0, 2.0, 0.5) == Approx(-std::log(0.5) / 0.5).epsilon(1e-12));
    CHECK_THROWS_AS(hyp2f1(1.0, 1.0, 0.0, 0.3), std::domain_error);
    CHECK_THROWS_AS(hyp2f1(1.0, 1.0, -2.0, 0.3), std::domain_error);
    CHECK_THROWS_AS(hyp2f1(1.0, 1.0, 2.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(hyp2f1(1.0, 1.0, 2.0, -0.1), std::domain_error);
}

TEST_CASE("hyp2f1 against the series oracle") {
    // Appendix-C-shaped parameters across levels, both sides of the x=1/2
    // switch point
    for (int k = 1; k <= 8; ++k) {
        const double a = (k + 3.0) / (k + 2.0), b = 3.0 / (k + 2.0), c = (k + 4.0) / (k + 2.0);
        for (double x : {0.05, 0.25, 0.49, 0.51, 0.75, 0.9, 0.95}) {
            const double got = hyp2f1(a, b, c, x);
            const double want = static_cast<double>(series_oracle(a, b, c, x));
            CHECK(got == Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("hyp2f1 integer c-a-b falls back to the euler transform") {
    // connection coefficients are singular here; the transformed series
    // still converges for c-a-b <= 0
    for (double x : {0.55, 0.8}) {
        const double got = hyp2f1(0.5, 1.5, 2.0, x);  // c-a-b = 0
        const double want = static_cast<double>(series_oracle(0.5L, 1.5L, 2.0L, x));
        CHECK(got == Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("hyp2f1 symmetry in a and b") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<> par(0.1, 2.5), arg(0.0, 0.97);
    for (int i = 0; i < 200; ++i) {
        const double a = par(gen), b = par(gen), c = par(gen) + 0.5, x = arg(gen);
        const double f1 = hyp2f1(a, b, c, x), f2 = hyp2f1(b, a, c, x);
        CHECK(f1 == Approx(f2).epsilon(1e-12));
    }
}

TEST_CASE("gauss-jacobi basics") {
    const QuadratureRule leg = gauss_jacobi(0.0, 0.0, 6);
    double total = 0.0;
    for (double w : leg.weights) total += w;
    CHECK(total == Approx(2.0).epsilon(1e-13));

    const QuadratureRule two = gauss_jacobi(0.0, 0.0, 2);
    double t2 = 0.0;
    for (std::size_t i = 0; i < two.nodes.size(); ++i)
        t2 += two.weights[i] * two.nodes[i] * two.nodes[i];
    CHECK(t2 == Approx(2.0 / 3.0).epsilon(1e-13));

    const QuadratureRule cheb = gauss_jacobi(-0.5, -0.5, 9);
    double pi_est = 0.0;
    for (double w : cheb.weights) pi_est += w;
    CHECK(pi_est == Approx(std::numbers::pi).epsilon(1e-12));

    CHECK_THROWS_AS(gauss_jacobi(-1.0, 0.0, 4), std::domain_error);
    CHECK_THROWS_AS(gauss_jacobi(0.0, -1.5, 4), std::domain_error);
    CHECK_THROWS_AS(gauss_jacobi(0.0, 0.0, 0), std::domain_error);
}

TEST_CASE("gauss-jacobi rules are well formed and exact on moments") {
    for (auto [alpha, beta] : std::vector<std::pair<double, double>>{
             {1.0 / 3.0, 0.0}, {-0.3, 0.7}, {0.5, -0.5}}) {
        for (int m : {3, 6, 8}) {
            const QuadratureRule rule = gauss_jacobi(alpha, beta, m);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                CHECK(rule.weights[i] > 0.0);
                CHECK(rule.nodes[i] > -1.0);
                CHECK(rule.nodes[i] < 1.0);
                if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
            }
            for (int k = 0; k < 2 * m; ++k) {
                double est = 0.0;
                for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                    est += rule.weights[i] * std::pow(rule.nodes[i], k);
                const double want = static_cast<double>(jacobi_moment(alpha, beta, 0.0L, k));
                CHECK(est == Approx(want).margin(1e-10 * std::abs(want) + 1e-12));
            }
        }
    }
}

TEST_CASE("df block positivity and refinement") {
    DFConfig cfg;
    cfg.nodes_per_axis = 48;
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) CHECK(df_block(4, x, cfg) > 0.0);
    CHECK(df_block(6, 0.4, cfg) > 0.0);

    const DFRefinement ref = df_block_refined(4, 0.3, cfg);
    CHECK(ref.rel_diff() < 1e-6);

    CHECK_THROWS_AS(df_block(3, 0.3, cfg), std::domain_error);
    CHECK_THROWS_AS(df_block(4, 0.0, cfg), std::domain_error);
    CHECK_THROWS_AS(df_block(4, 1.0, cfg), std::domain_error);
    DFConfig bad = cfg;
    bad.v_max = 1.0;
    CHECK_THROWS_AS(df_block(4, 0.3, bad), std::domain_error);
    DFConfig coarse = cfg;
    coarse.nodes_per_axis = 4;
    CHECK_THROWS_AS(df_block_checked(4, 0.37, coarse, 1e-12), numeric_error);
}

TEST_CASE("df block small-x exponent") {
    DFConfig cfg;
    cfg.nodes_per_axis = 48;
    const std::vector<double> sweep{1e-2, 1e-3, 1e-4};
    std::vector<double> ly, lx;
    for (double x : sweep) {
        lx.push_back(std::log(x));
        ly.push_back(std::log(df_block(4, x, cfg)));
    }
    const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
    CHECK(slope == Approx(1.0 / 3.0).margin(0.02));
}

TEST_CASE("cubic spline interpolates smooth data") {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 40; ++i) {
        const double x = -2.0 + i * 0.1;
        xs.push_back(x);
        ys.push_back(std::sin(x));
    }
    const CubicSpline s(xs, ys);
    for (double x : {-1.45, -0.4, 0.11, 1.23})  // interior: full spline accuracy
        CHECK(s(x) == Approx(std::sin(x)).margin(2e-5));
    // natural boundary conditions cost accuracy in the outermost panels
    CHECK(s(1.93) == Approx(std::sin(1.93)).margin(1e-3));
    CHECK(s(-5.0) == Approx(std::sin(-2.0)).margin(1e-12));  // clamped
}
