#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cosetsle/rational.hpp"

namespace cosetsle {

// ---------------------------------------------------------------------------
// Model parameter tables
// ---------------------------------------------------------------------------

enum class ModelFamily { Parafermion, SU2k };

/// Central charge of a G/A coset at level k from the dimensions and dual
/// Coxeter numbers of g and a:  c = k dim g/(k+h_g) - k dim a/(k+h_a).
inline Rational coset_central_charge(int k, int dim_g, int h_dual_g, int dim_a, int h_dual_a) {
    if (k < 1) throw std::domain_error("coset_central_charge: level must be >= 1");
    if (dim_g <= 0 || dim_a <= 0)
        throw std::domain_error("coset_central_charge: dimensions must be positive");
    return Rational(static_cast<std::int64_t>(k) * dim_g, k + h_dual_g) -
           Rational(static_cast<std::int64_t>(k) * dim_a, k + h_dual_a);
}

/// Conformal weight h_{(j,jz)} = j(j+2)/(4(n+2)) - jz^2/(4n) of the Z(n)
/// parafermion primary (j is twice the isospin).
inline Rational parafermion_weight(int n, int j, int jz) {
    if (n <= 0) throw std::domain_error("parafermion_weight: level must be positive");
    return Rational(static_cast<std::int64_t>(j) * (j + 2), 4 * static_cast<std::int64_t>(n + 2)) -
           Rational(static_cast<std::int64_t>(jz) * jz, 4 * static_cast<std::int64_t>(n));
}

/// Model family + level with the derived SLE data: kappa, tau, central
/// charge and the boundary-field weights h_bcc (= h_Lambda) and h_fused
/// (weight of the doubled boundary field, the x->0 channel).
struct CosetModel {
    ModelFamily family{ModelFamily::Parafermion};
    int level{0};

    Rational kappa;
    Rational tau;
    Rational central_charge;
    Rational h_bcc;
    Rational h_fused;

    double kappa_d() const { return kappa.to_double(); }
    double tau_d() const { return tau.to_double(); }

    const char* family_name() const {
        return family == ModelFamily::Parafermion ? "parafermion" : "su2k";
    }
};

/// Populates a CosetModel.
///   Parafermion (Z(n), n >= 2): kappa = 4(n+1)/(n+3), tau = 4n^3/(n+2)^3,
///     c = 2(n-1)/(n+2), bcc field (j,jz) = (2,0).
///   SU2k (k >= 1): kappa = 4(k+2)/(k+3), tau = 2/(k+3), bcc field j = 1.
/// Levels n = 2,3 of the parafermion family are exposed but are an
/// extrapolation of the n >= 4 analysis.
inline CosetModel model_params(ModelFamily family, int level) {
    CosetModel m;
    m.family = family;
    m.level = level;
    const std::int64_t L = level;
    switch (family) {
        case ModelFamily::Parafermion: {
            if (level < 2) throw std::domain_error("model_params: parafermion level must be >= 2");
            m.kappa = Rational(4 * (L + 1), L + 3);
            m.tau = Rational(4 * L * L * L, (L + 2) * (L + 2) * (L + 2));
            m.central_charge = Rational(2 * (L - 1), L + 2);
            m.h_bcc = parafermion_weight(level, 2, 0);    // 2/(n+2)
            m.h_fused = parafermion_weight(level, 4, 0);  // 6/(n+2)
            break;
        }
        case ModelFamily::SU2k: {
            if (level < 1) throw std::domain_error("model_params: su2k level must be >= 1");
            m.kappa = Rational(4 * (L + 2), L + 3);
            m.tau = Rational(2, L + 3);
            m.central_charge = Rational(3 * L, L + 2);
            m.h_bcc = Rational(3, 4 * (L + 2));   // j = 1
            m.h_fused = Rational(2, L + 2);       // j = 2
            break;
        }
    }
    if (!(Rational(0) < m.kappa && m.kappa < Rational(8)))
        throw std::domain_error("model_params: kappa outside (0,8)");
    return m;
}

inline ModelFamily family_from_name(const std::string& name) {
    if (name == "parafermion") return ModelFamily::Parafermion;
    if (name == "su2k") return ModelFamily::SU2k;
    throw std::domain_error("unknown model family: " + name);
}

// ---------------------------------------------------------------------------
// su(2) representation data
// ---------------------------------------------------------------------------

/// Dense complex matrix, row-major; only the small sizes needed for su(2)
/// irreps and their tensor products.
struct CMatrix {
    int dim{0};
    std::vector<std::complex<double>> a;

    CMatrix() = default;
    explicit CMatrix(int n) : dim(n), a(static_cast<std::size_t>(n) * n) {}

    std::complex<double>& at(int i, int j) { return a[static_cast<std::size_t>(i) * dim + j]; }
    const std::complex<double>& at(int i, int j) const {
        return a[static_cast<std::size_t>(i) * dim + j];
    }

    friend CMatrix operator*(const CMatrix& x, const CMatrix& y) {
        CMatrix r(x.dim);
        for (int i = 0; i < x.dim; ++i)
            for (int k = 0; k < x.dim; ++k) {
                const auto xik = x.at(i, k);
                if (xik == std::complex<double>{}) continue;
                for (int j = 0; j < x.dim; ++j) r.at(i, j) += xik * y.at(k, j);
            }
        return r;
    }
    friend CMatrix operator+(const CMatrix& x, const CMatrix& y) {
        CMatrix r = x;
        for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
        return r;
    }
    friend CMatrix operator-(const CMatrix& x, const CMatrix& y) {
        CMatrix r = x;
        for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
        return r;
    }
    friend CMatrix operator*(std::complex<double> s, const CMatrix& y) {
        CMatrix r = y;
        for (auto& v : r.a) v *= s;
        return r;
    }

    double max_abs() const {
        double m = 0;
        for (const auto& v : a) m = std::max(m, std::abs(v));
        return m;
    }
};

inline CMatrix commutator(const CMatrix& x, const CMatrix& y) { return x * y - y * x; }

/// Generator triple t^a (a = 1..3) for the spin-j/2 irrep of su(2) in the
/// spin-operator (Hermitian) convention: [t^a,t^b] = i eps^{abc} t^c and
/// Casimir sum_a t^a t^a = (j/2)(j/2+1) * 1.  The noise covariance
/// delta^{ab} of the driving module refers to exactly this basis, i.e. the
/// proportionality constant between this basis and the Killing-orthonormal
/// one is fixed to 1 (recorded in killing_normalization).
struct IrrepAction {
    int j{0};  // twice the isospin
    std::array<CMatrix, 3> generators;
    double casimir{0.0};
    double killing_normalization{1.0};

    int dim() const { return j + 1; }
};

inline IrrepAction su2_generators(int j) {
    if (j < 0) throw std::domain_error("su2_generators: j must be >= 0");
    const int n = j + 1;
    const double s = 0.5 * j;
    CMatrix sp(n), sm(n), sz(n);
    // basis |m>, m = s, s-1, ..., -s (row 0 = highest weight)
    for (int r = 0; r < n; ++r) {
        const double m = s - r;
        sz.at(r, r) = m;
        if (r > 0) {  // <m+1|S+|m>, m = s-r
            const double c = std::sqrt(s * (s + 1) - m * (m + 1));
            sp.at(r - 1, r) = c;
            sm.at(r, r - 1) = c;
        }
    }
    IrrepAction rep;
    rep.j = j;
    rep.generators[0] = 0.5 * sp + 0.5 * sm;                               // Sx
    rep.generators[1] = std::complex<double>(0, -0.5) * sp +
                        std::complex<double>(0, 0.5) * sm;                 // Sy
    rep.generators[2] = sz;
    rep.casimir = s * (s + 1);
    return rep;
}

// ---------------------------------------------------------------------------
// Fateev-Zamolodchikov lattice weights
// ---------------------------------------------------------------------------

/// The printed FZ product mixes N with n and leaves the per-weight upper
/// limit ambiguous; both readings are exposed and the Z(n) symmetry
/// x_m = x_{n-m} selects the default (UpToMminus1, which satisfies it
/// exactly).  No interpolation beyond these two documented options.
enum class FZProductRange {
    UpToMminus1,  // x_m = prod_{k=1}^{m-1}, default
    UpToM,        // x_m = prod_{k=1}^{m}, alternate reading
};

struct FZWeights {
    int n{0};
    std::vector<double> weights;  // x_0..x_{n-1}
};

/// Boltzmann weight ratios of the self-dual Z(n) critical point,
/// x_m = prod_k sin(pi k/n + pi/(4n)) / sin(pi (k+1)/n - pi/(4n)).
inline FZWeights fz_weights(int n, FZProductRange range = FZProductRange::UpToMminus1) {
    if (n < 2) throw std::domain_error("fz_weights: n must be >= 2");
    const double pi = std::numbers::pi;
    FZWeights w;
    w.n = n;
    w.weights.resize(static_cast<std::size_t>(n), 1.0);
    for (int m = 1; m < n; ++m) {
        const int kmax = range == FZProductRange::UpToMminus1 ? m - 1 : m;
        double x = 1.0;
        for (int k = 1; k <= kmax; ++k)
            x *= std::sin(pi * k / n + pi / (4.0 * n)) /
                 std::sin(pi * (k + 1) / n - pi / (4.0 * n));
        w.weights[static_cast<std::size_t>(m)] = x;
    }
    return w;
}

}  // namespace cosetsle
