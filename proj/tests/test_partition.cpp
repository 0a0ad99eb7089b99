#include <catch2/catch.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "cosetsle/partition.hpp"

using namespace cosetsle;

namespace {

long double block_series_oracle(long double a, long double b, long double c, long double x) {
    long double term = 1.0L, sum = 1.0L;
    for (long k = 0; k < 2000000; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0L)) * x;
        sum += term;
        if (std::abs(term) <= 1e-21L * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

TEST_CASE("two-sle exponent") {
    CHECK(two_sle_delta(0.0, 2.0 / 6.0) == Approx(-2.0 / 3.0));
    CHECK(two_sle_delta(6.0 / 6.0, 2.0 / 6.0) == Approx(1.0 / 3.0));
    CHECK(two_sle_delta(0.84, 0.42) == 0.0);
    CHECK(two_sle_delta(Rational(0), Rational(1, 3)) == Rational(-2, 3));
    CHECK(two_sle_delta(Rational(1), Rational(1, 3)) == Rational(1, 3));
}

TEST_CASE("two-sle channel weights") {
    const CosetModel pf4 = model_params(ModelFamily::Parafermion, 4);
    CHECK(channel_weights(pf4, TwoSleChannel::Identity).delta == Rational(-2, 3));
    CHECK(channel_weights(pf4, TwoSleChannel::Fused).delta == Rational(1, 3));
    CHECK_THROWS_AS(channel_weights(pf4, TwoSleChannel::Middle), std::domain_error);
    CHECK(channel_weights(pf4, TwoSleChannel::Middle, true).delta == Rational(-1, 3));
}

TEST_CASE("two-sle partition function") {
    CHECK(two_sle_Z(1.0, 3.0, 1.0) == Approx(2.0));
    CHECK(two_sle_Z(0.0, 5.5, -1.0) == Approx(1.0));
    CHECK(two_sle_Z(1.0 / 3.0, 1.0, 0.0) == Approx(1.0));
    CHECK_THROWS_AS(two_sle_Z(1.0, 2.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(two_sle_Z(1.0, 1.0, 2.0), std::domain_error);
}

TEST_CASE("three-sle partition function") {
    CHECK(three_sle_Z(4, 0.0, 1.0, 2.0) == Approx(std::pow(2.0, 1.0 / 3.0)));
    CHECK(three_sle_Z(4, 1.0, 2.0, 3.0) == Approx(three_sle_Z(4, 0.0, 1.0, 2.0)));
    // scaling covariance: x -> 2x multiplies Z by 2^{3*2/(n+2)} exactly
    CHECK(three_sle_Z(4, -0.5, 1.0, 4.0) * std::pow(2.0, 6.0 / 6.0) ==
          Approx(three_sle_Z(4, -1.0, 2.0, 8.0)).epsilon(1e-15));
    CHECK(three_sle_Z(1000000, 0.0, 1.0, 2.0) == Approx(1.0).margin(1e-5));
    CHECK_THROWS_AS(three_sle_Z(4, 0.0, 0.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(three_sle_Z(4, 1.0, 0.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(three_sle_Z(3, 0.0, 1.0, 2.0), std::domain_error);
}

TEST_CASE("cross ratio") {
    CHECK(cross_ratio(0.0, 0.3, 1.0) == Approx(0.3));
    CHECK(cross_ratio(1.0, 2.0, 3.0) == Approx(0.5));
    // Moebius invariance under a common affine map, finite and infinite x4
    CHECK(cross_ratio(5.0, 5.6, 7.0) == Approx(cross_ratio(0.0, 0.3, 1.0)));
    const double finite = cross_ratio(0.0, 0.3, 1.0, 2.0);
    CHECK(cross_ratio(5.0, 5.6, 7.0, 9.0) == Approx(finite).epsilon(1e-12));
    CHECK_THROWS_AS(cross_ratio(0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(cross_ratio(0.3, 0.0, 1.0), std::domain_error);
}

TEST_CASE("block C2 closed form") {
    const CosetModel su22 = model_params(ModelFamily::SU2k, 2);
    CHECK(block_C2(su22, 0.0) == 0.0);
    const double x = 0.25;
    const double want =
        std::pow(x * (1 - x), 1.0 / 8.0) *
        static_cast<double>(block_series_oracle(1.25L, 0.75L, 1.5L, 0.25L));
    CHECK(block_C2(su22, x) == Approx(want).epsilon(1e-9));
    // closed form against the series oracle across levels and arguments
    for (int k = 1; k <= 4; ++k) {
        const CosetModel m = model_params(ModelFamily::SU2k, k);
        for (double xx : {0.1, 0.37, 0.62})
            CHECK(block_C2(m, xx) ==
                  Approx(std::pow(xx * (1 - xx), 1.0 / (2.0 * (k + 2.0))) *
                         static_cast<double>(block_series_oracle(
                             (k + 3.0L) / (k + 2.0L), 3.0L / (k + 2.0L),
                             (k + 4.0L) / (k + 2.0L), xx)))
                      .epsilon(1e-9));
    }
}

TEST_CASE("log gradients: closed forms vs finite differences") {
    const CosetModel su22 = model_params(ModelFamily::SU2k, 2);

    const PurePartition two = PurePartition::two_sle_with_delta(0.4);
    const std::vector<double> xs2{-0.7, 1.1};
    const auto g2 = log_Z_gradient(two, xs2);
    CHECK(g2[0] == Approx(0.4 / (xs2[0] - xs2[1])));
    CHECK(g2[1] == Approx(-0.4 / (xs2[0] - xs2[1])));

    const PurePartition three = PurePartition::three_sle_unique(4);
    const std::vector<double> xs3{0.0, 1.0, 2.0};
    const auto g3 = log_Z_gradient(three, xs3);
    CHECK(g3[0] == Approx(-0.5));
    CHECK(g3[1] == Approx(0.0).margin(1e-15));
    CHECK(g3[2] == Approx(0.5));

    // generic-point finite-difference consistency of every kind
    const PurePartition four = PurePartition::four_point_sum(su22);
    const std::vector<const PurePartition*> zs{&two, &three, &four};
    const std::vector<std::vector<double>> pts{{-0.7, 1.1}, {-0.2, 0.9, 2.3}, {-0.2, 0.9, 2.3}};
    for (std::size_t c = 0; c < zs.size(); ++c) {
        const auto grad = log_Z_gradient(*zs[c], pts[c]);
        for (std::size_t i = 0; i < pts[c].size(); ++i) {
            std::vector<double> hi = pts[c], lo = pts[c];
            const double h = 1e-6;
            hi[i] += h;
            lo[i] -= h;
            const double fd =
                (std::log(zs[c]->value(hi)) - std::log(zs[c]->value(lo))) / (2.0 * h);
            CHECK(grad[i] == Approx(fd).epsilon(1e-6).margin(1e-8));
        }
    }

    CHECK_THROWS_AS(log_Z_gradient(two, std::vector<double>{1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(log_Z_gradient(two, std::vector<double>{2.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(log_Z_gradient(two, std::vector<double>{1.0, 2.0, 3.0}), std::domain_error);
}

TEST_CASE("four-point drift matches the analytic hypergeometric derivative") {
    const CosetModel su22 = model_params(ModelFamily::SU2k, 2);
    const CrossRatioDrift drift(su22);
    const PurePartition four = PurePartition::four_point_sum(su22);
    const std::vector<double> xs{0.0, 0.3, 1.0};
    const auto fd_grad = log_Z_gradient(four, xs);
    const double den = xs[2] - xs[0];
    const double x = (xs[1] - xs[0]) / den;
    const double w = drift.w_direct(x);
    const double h = kac_h12(su22.kappa_d());
    const std::array<double, 3> analytic{2.0 * h / den + w * (-(xs[2] - xs[1]) / (den * den)),
                                         w / den,
                                         -2.0 * h / den + w * (-(xs[1] - xs[0]) / (den * den))};
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(fd_grad[i] == Approx(analytic[i]).epsilon(1e-6));
    // the spline table agrees with direct evaluation
    for (double xx : {0.05, 0.21, 0.5, 0.77, 0.93})
        CHECK(drift(xx) == Approx(drift.w_direct(xx)).epsilon(1e-6).margin(1e-8));
}

TEST_CASE("insertion ratios") {
    const CosetModel pf4 = model_params(ModelFamily::Parafermion, 4);
    const std::vector<IrrepAction> pair{su2_generators(2), su2_generators(2)};
    const PurePartition z = PurePartition::two_sle(pf4, TwoSleChannel::Identity);
    const std::vector<double> xs{0.0, 1.0};

    // Cartan generator annihilates the zero-weight boundary state
    const InsertionAction cartan = insertion_ratio(z, pair, xs, 3, 0);
    CHECK(cartan.scalar);
    CHECK(cartan.scalar_ratio == Approx(0.0).margin(1e-14));

    // trivial representation: everything vanishes
    const std::vector<IrrepAction> trivial{su2_generators(0), su2_generators(0)};
    for (int a = 1; a <= 3; ++a) {
        const InsertionAction act = insertion_ratio(z, trivial, xs, a, 1);
        CHECK(act.scalar);
        CHECK(act.scalar_ratio == 0.0);
    }

    // coset directions on the zero-weight state: zero scalar part, nonzero action
    const InsertionAction coset = insertion_ratio(z, pair, xs, 1, 0);
    CHECK(coset.scalar_ratio == Approx(0.0).margin(1e-14));
    CHECK_FALSE(coset.scalar);

    // epsilon-contracted spin-1/2 pair against a dense contraction oracle
    const std::vector<IrrepAction> halves{su2_generators(1), su2_generators(1)};
    PurePartition ze = PurePartition::two_sle_with_delta(-0.75);
    ze.set_internal(epsilon_pair());
    const InternalTensor eps = epsilon_pair();
    for (int a = 1; a <= 3; ++a) {
        for (int beta = 0; beta < 2; ++beta) {
            const InsertionAction act = insertion_ratio(ze, halves, xs, a, beta);
            const CMatrix& g = halves[0].generators[static_cast<std::size_t>(a - 1)];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    std::complex<double> want = 0.0;
                    for (int l = 0; l < 2; ++l)
                        want += beta == 0
                                    ? g.at(i, l) * eps.c[static_cast<std::size_t>(l * 2 + j)]
                                    : g.at(j, l) * eps.c[static_cast<std::size_t>(i * 2 + l)];
                    CHECK(std::abs(act.action[static_cast<std::size_t>(i * 2 + j)] - want) <=
                          1e-10);
                }
            CHECK(act.scalar_ratio == Approx(0.0).margin(1e-14));  // singlet expectation
        }
    }

    CHECK_THROWS_AS(insertion_ratio(z, halves, std::vector<double>{0.0}, 1, 0),
                    std::domain_error);
    CHECK_THROWS_AS(apply_generator(eps, halves, 4, 0), std::domain_error);
    const std::vector<IrrepAction> mismatch{su2_generators(2), su2_generators(1)};
    CHECK_THROWS_AS(apply_generator(eps, mismatch, 1, 0), std::domain_error);
}

TEST_CASE("ordering is rejected, not silently sorted") {
    const PurePartition three = PurePartition::three_sle_unique(4);
    CHECK_THROWS_AS(three.value(std::vector<double>{1.0, 0.0, 2.0}), std::domain_error);
    CHECK_THROWS_AS(three.value(std::vector<double>{0.0, 0.0, 2.0}), std::domain_error);
}
