#include <catch2/catch.hpp>

#include <cmath>

#include "cosetsle/algebra.hpp"

using namespace cosetsle;

TEST_CASE("rational arithmetic") {
    CHECK(Rational(4, 6) == Rational(2, 3));
    CHECK(Rational(1, -2) == Rational(-1, 2));
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(20, 7) * Rational(7, 20) == Rational(1));
    CHECK(Rational(2) - Rational(14, 30) == Rational(23, 15));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(16, 5).to_double() == Approx(3.2));
    CHECK(Rational(23, 15).str() == "23/15");
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("coset central charge") {
    CHECK(coset_central_charge(2, 3, 2, 1, 0) == Rational(1, 2));
    CHECK(coset_central_charge(1, 3, 2, 3, 2) == Rational(0));
    CHECK(coset_central_charge(4, 3, 2, 1, 0) == Rational(1));
    // SU(2)_n / U(1) reproduces 2(n-1)/(n+2) across the whole range
    for (int n = 2; n <= 64; ++n)
        CHECK(coset_central_charge(n, 3, 2, 1, 0) == Rational(2 * (n - 1), n + 2));
    CHECK_THROWS_AS(coset_central_charge(0, 3, 2, 1, 0), std::domain_error);
}

TEST_CASE("parafermion weights") {
    CHECK(parafermion_weight(4, 2, 0) == Rational(1, 3));
    CHECK(parafermion_weight(7, 0, 0) == Rational(0));
    CHECK(parafermion_weight(3, 1, 1) == Rational(1, 15));
    for (int n = 2; n <= 12; ++n)
        for (int j = 0; j <= n; ++j)
            for (int jz = 0; jz <= j; ++jz)
                CHECK(parafermion_weight(n, j, jz) == parafermion_weight(n, j, -jz));
    CHECK_THROWS_AS(parafermion_weight(0, 2, 0), std::domain_error);
}

TEST_CASE("model parameter tables") {
    const CosetModel pf4 = model_params(ModelFamily::Parafermion, 4);
    CHECK(pf4.kappa == Rational(20, 7));
    CHECK(pf4.tau == Rational(32, 27));
    CHECK(pf4.central_charge == Rational(1));
    CHECK(pf4.h_bcc == Rational(1, 3));
    CHECK(pf4.h_fused == Rational(1));

    const CosetModel su22 = model_params(ModelFamily::SU2k, 2);
    CHECK(su22.kappa == Rational(16, 5));
    CHECK(su22.tau == Rational(2, 5));
    CHECK(su22.h_bcc == Rational(3, 16));
    CHECK(su22.h_fused == Rational(1, 2));

    CHECK(model_params(ModelFamily::Parafermion, 2).central_charge == Rational(1, 2));

    // kappa increasing in n and below 4; tau approaches 4 from below
    Rational prev_kappa(0), prev_tau(0);
    for (int n = 2; n <= 64; ++n) {
        const CosetModel m = model_params(ModelFamily::Parafermion, n);
        CHECK(prev_kappa < m.kappa);
        CHECK(m.kappa < Rational(4));
        CHECK(prev_tau < m.tau);
        CHECK(m.tau < Rational(4));
        prev_kappa = m.kappa;
        prev_tau = m.tau;
    }
    CHECK(model_params(ModelFamily::Parafermion, 64).tau.to_double() > 3.5);

    CHECK_THROWS_AS(model_params(ModelFamily::Parafermion, 1), std::domain_error);
    CHECK_THROWS_AS(model_params(ModelFamily::SU2k, 0), std::domain_error);
    CHECK_THROWS_AS(family_from_name("potts"), std::domain_error);
}

TEST_CASE("su2 generators") {
    const IrrepAction trivial = su2_generators(0);
    for (const auto& g : trivial.generators) CHECK(g.max_abs() == 0.0);

    const IrrepAction half = su2_generators(1);
    CHECK(half.casimir == Approx(0.75));

    const IrrepAction one = su2_generators(2);
    CHECK(one.generators[2].at(0, 0).real() == Approx(1.0));
    CHECK(one.generators[2].at(1, 1).real() == Approx(0.0));
    CHECK(one.generators[2].at(2, 2).real() == Approx(-1.0));

    // su(2) relations [t^a, t^b] = i eps^{abc} t^c and the Casimir, j = 0..4
    for (int j = 0; j <= 4; ++j) {
        const IrrepAction rep = su2_generators(j);
        for (int a = 0; a < 3; ++a) {
            const int b = (a + 1) % 3, c = (a + 2) % 3;
            const CMatrix lhs = commutator(rep.generators[static_cast<std::size_t>(a)],
                                           rep.generators[static_cast<std::size_t>(b)]);
            const CMatrix rhs =
                std::complex<double>(0, 1) * rep.generators[static_cast<std::size_t>(c)];
            CHECK((lhs - rhs).max_abs() <= 1e-12);
        }
        CMatrix cas(j + 1);
        for (const auto& g : rep.generators) cas = cas + g * g;
        for (int d = 0; d <= j; ++d)
            CHECK(cas.at(d, d).real() == Approx(rep.casimir).margin(1e-12));
    }

    CHECK_THROWS_AS(su2_generators(-1), std::domain_error);
}

TEST_CASE("fz weights") {
    for (int n : {2, 3, 4, 7, 12}) CHECK(fz_weights(n).weights[0] == 1.0);

    const FZWeights z3 = fz_weights(3);
    CHECK(z3.weights[1] == Approx(z3.weights[2]));

    // Z(n) symmetry x_m = x_{n-m} holds exactly for the default range
    for (int n = 2; n <= 12; ++n) {
        const FZWeights w = fz_weights(n);
        for (int m = 1; m < n; ++m) {
            CHECK(w.weights[static_cast<std::size_t>(m)] ==
                  Approx(w.weights[static_cast<std::size_t>(n - m)]).epsilon(1e-13));
            CHECK(w.weights[static_cast<std::size_t>(m)] > 0.0);
        }
    }

    // alternate product range reproduces the cot(pi/8) candidate at n = 2
    const FZWeights alt = fz_weights(2, FZProductRange::UpToM);
    CHECK(alt.weights[1] == Approx(1.0 / std::tan(std::numbers::pi / 8.0)));

    CHECK_THROWS_AS(fz_weights(1), std::domain_error);
}
