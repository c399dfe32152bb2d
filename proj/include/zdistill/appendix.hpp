#pragma once

// Determinants of the shifted upper sub-sector block, diag(c_j -+ 1) with
// off-diagonal d_j for j = i..2, and the closed forms that govern whether
// that block can carry an eigenvalue +-1.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "zdistill/cavity_model.hpp"
#include "zdistill/error.hpp"
#include "zdistill/tridiagonal.hpp"

namespace zdistill::appendix {

using cavity::c_coeff;
using cavity::d_coeff;
using cavity::phi;

/// Products (g_A t_A, g_B t_B); nothing else enters.
struct Angles {
    double a = 0.0;
    double b = 0.0;
};

inline Angles angles_of(const cavity::CavityParams& p) { return {p.ga_ta(), p.gb_tb()}; }

namespace detail {

inline void require_range(int i, int k, const char* what) {
    if (k < 2 || i < 2 || i > k) throw PreconditionError(std::string(what) + ": need 2 <= i <= k");
}

// diag c_i + shift ... c_2 + shift, off-diagonal d_i ... d_3
inline Eigen::MatrixXd shifted_block(int i, int k, Angles g, double shift) {
    const int n = i - 1;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        const int j = i - r;
        m(r, r) = c_coeff(j, k, g.a, g.b) + shift;
        if (r + 1 < n) m(r, r + 1) = m(r + 1, r) = d_coeff(j, k, g.a, g.b);
    }
    return m;
}

inline std::vector<double> recurrence_minors(int k, Angles g, double shift) {
    std::vector<double> diag, off;
    for (int j = 2; j <= k; ++j) {
        diag.push_back(c_coeff(j, k, g.a, g.b) + shift);
        off.push_back(j > 2 ? d_coeff(j, k, g.a, g.b) : 0.0);
    }
    // minors grow from the c_2 corner: entry t is the determinant for i = t + 2
    return tridiagonal_minors(diag, off);
}

inline double sq(double x) { return x * x; }

} // namespace detail

/// Direct (LU) determinant of the (i-1)x(i-1) block with c_j - 1.
inline double bruteforce_I(int i, int k, Angles g) {
    detail::require_range(i, k, "bruteforce_I");
    return detail::shifted_block(i, k, g, -1.0).determinant();
}

/// Direct (LU) determinant of the (i-1)x(i-1) block with c_j + 1.
inline double bruteforce_J(int i, int k, Angles g) {
    detail::require_range(i, k, "bruteforce_J");
    return detail::shifted_block(i, k, g, 1.0).determinant();
}

struct DeterminantSeries {
    int k = 0;
    std::vector<double> I; ///< I_2 .. I_k
    std::vector<double> P; ///< P_2 .. P_k, I_i = (-1)^{i+1} P_i
    std::vector<double> J; ///< J_2 .. J_k

    double I_at(int i) const { return I.at(static_cast<std::size_t>(i - 2)); }
    double P_at(int i) const { return P.at(static_cast<std::size_t>(i - 2)); }
    double J_at(int i) const { return J.at(static_cast<std::size_t>(i - 2)); }
};

/// P_i = cos^2 phi_A^(i) cos^2 phi_B^(k-i) P_{i-1}
///       + prod_{j=1}^{i-1} sin^2 phi_A^(j+1) sin^2 phi_B^(k-j),  P_1 = 1.
/// J_i from the three-term recurrence. Throws InvariantViolation if
/// P_i < -1e-12 or J_i <= 0.
inline DeterminantSeries recursion_P(int k, Angles g) {
    if (k < 2) throw PreconditionError("recursion_P: k must be >= 2");
    using detail::sq;
    DeterminantSeries s;
    s.k = k;
    double prev = 1.0;
    double prod = 1.0;
    for (int i = 2; i <= k; ++i) {
        prod *= sq(std::sin(phi(g.a, i))) * sq(std::sin(phi(g.b, k - i + 1)));
        const double p = sq(std::cos(phi(g.a, i))) * sq(std::cos(phi(g.b, k - i))) * prev + prod;
        if (p < -1e-12) throw InvariantViolation("recursion_P: P_" + std::to_string(i) + " negative");
        s.P.push_back(p);
        s.I.push_back((i % 2 == 1) ? p : -p);
        prev = p;
    }
    s.J = detail::recurrence_minors(k, g, 1.0);
    for (std::size_t t = 0; t < s.J.size(); ++t) {
        if (!(s.J[t] > 0.0)) throw InvariantViolation("recursion_P: J_" + std::to_string(t + 2) + " not positive");
    }
    return s;
}

/// I_2 .. I_k from the three-term recurrence on the c_j - 1 block.
inline std::vector<double> recurrence_I(int k, Angles g) {
    if (k < 2) throw PreconditionError("recurrence_I: k must be >= 2");
    return detail::recurrence_minors(k, g, -1.0);
}

/// The k terms of the unrolled sum for P_k: term n = 1 is the all-cosine
/// product, term n = k the all-sine product, and 2 <= n <= k-1
///   sin^2 A(2..n) cos^2 A(n+1..k) cos^2 B(1..k-n-1) sin^2 B(k-n+1..k-1).
inline std::vector<double> explicit_Pk_terms(int k, Angles g) {
    if (k < 2) throw PreconditionError("explicit_Pk: k must be >= 2");
    using detail::sq;
    auto sa = [&](int j) { return sq(std::sin(phi(g.a, j))); };
    auto ca = [&](int j) { return sq(std::cos(phi(g.a, j))); };
    auto sb = [&](int j) { return sq(std::sin(phi(g.b, j))); };
    auto cb = [&](int j) { return sq(std::cos(phi(g.b, j))); };
    std::vector<double> terms;
    for (int n = 1; n <= k; ++n) {
        double t = 1.0;
        for (int j = 2; j <= n; ++j) t *= sa(j);
        for (int j = n + 1; j <= k; ++j) t *= ca(j);
        for (int j = 1; j <= k - n - 1; ++j) t *= cb(j);
        for (int j = k - n + 1; j <= k - 1; ++j) t *= sb(j);
        terms.push_back(t);
    }
    return terms;
}

inline double explicit_Pk(int k, Angles g) {
    double sum = 0.0;
    for (double t : explicit_Pk_terms(k, g)) sum += t;
    return sum;
}

// ---------------------------------------------------------------------------

struct PositivityViolation {
    int k = 0;
    int i = 0;
    double ga_ta = 0.0;
    double gb_tb = 0.0;
    double J = 0.0;
};

struct PositivityReport {
    unsigned long long seed = 42;
    int samples = 0;
    int k_max = 0;
    double min_J = std::numeric_limits<double>::infinity();
    std::vector<PositivityViolation> violations;

    bool passed() const { return violations.empty(); }
};

/// Uniform samples of (g_A t_A, g_B t_B) in (0, pi)^2; every J_i, 2 <= i <= k
/// <= k_max, from the direct determinant.
inline PositivityReport positivity_scan(int k_max = 9, int samples = 1000, unsigned long long seed = 42) {
    if (k_max < 2 || samples < 0) throw PreconditionError("positivity_scan: need k_max >= 2 and samples >= 0");
    PositivityReport rep;
    rep.seed = seed;
    rep.samples = samples;
    rep.k_max = k_max;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 3.14159265358979323846);
    for (int s = 0; s < samples; ++s) {
        const Angles g{u(rng), u(rng)};
        for (int k = 2; k <= k_max; ++k) {
            for (int i = 2; i <= k; ++i) {
                const double j = bruteforce_J(i, k, g);
                rep.min_J = std::min(rep.min_J, j);
                if (!(j > 0.0)) rep.violations.push_back({k, i, g.a, g.b, j});
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

inline constexpr double kDeterminantZero = 1e-12;
inline constexpr double kUnitEigenTol = 1e-8;

struct UnitScanRow {
    int k = 0;
    double ga_ta = 0.0;
    double gb_tb = 0.0;
    double Pk = 0.0;
    double Jk = 0.0;
    double max_abs_eig = 0.0;
    double dist_plus_one = 0.0;  ///< min |lambda - 1|
    double dist_minus_one = 0.0; ///< min |lambda + 1|
    bool plus_one = false;       ///< eigensolver finds +1
    bool minus_one = false;
    bool determinant_zero = false; ///< |P_k| <= 1e-12
};

/// For each k, eigenvalues of the upper sub-sector block (c_k..c_2, d_k..d_3)
/// against the determinant predictions. Throws ConsistencyError when
/// prod(lambda - 1) and I_k differ by more than 1e-8, when a vanishing P_k
/// has no +1 eigenvalue, or when a +1 eigenvalue comes with a clearly
/// non-zero P_k; likewise for -1 and J_k.
inline std::vector<UnitScanRow> unit_eigenvalue_scan(int k_lo, int k_hi, Angles g) {
    if (k_lo < 2 || k_hi < k_lo) throw PreconditionError("unit_eigenvalue_scan: need 2 <= k_lo <= k_hi");
    std::vector<UnitScanRow> rows;
    for (int k = k_lo; k <= k_hi; ++k) {
        const DeterminantSeries s = recursion_P(k, g);
        const Eigen::MatrixXd block = detail::shifted_block(k, k, g, 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
        const Eigen::VectorXd& lam = es.eigenvalues();

        UnitScanRow r;
        r.k = k;
        r.ga_ta = g.a;
        r.gb_tb = g.b;
        r.Pk = s.P_at(k);
        r.Jk = s.J_at(k);
        r.max_abs_eig = lam.cwiseAbs().maxCoeff();
        r.dist_plus_one = (lam.array() - 1.0).abs().minCoeff();
        r.dist_minus_one = (lam.array() + 1.0).abs().minCoeff();
        r.plus_one = r.dist_plus_one <= kUnitEigenTol;
        r.minus_one = r.dist_minus_one <= kUnitEigenTol;
        r.determinant_zero = std::abs(r.Pk) <= kDeterminantZero;

        double prod_minus = 1.0, prod_plus = 1.0;
        for (Index t = 0; t < lam.size(); ++t) {
            prod_minus *= lam(t) - 1.0;
            prod_plus *= lam(t) + 1.0;
        }
        const std::string where = " at k = " + std::to_string(k);
        if (std::abs(prod_minus - s.I_at(k)) > kUnitEigenTol) {
            throw ConsistencyError("prod(lambda - 1) differs from I_k" + where);
        }
        if (std::abs(prod_plus - s.J_at(k)) > kUnitEigenTol) {
            throw ConsistencyError("prod(lambda + 1) differs from J_k" + where);
        }
        const double loose = kUnitEigenTol * std::ldexp(1.0, k);
        if (r.determinant_zero && !r.plus_one) throw ConsistencyError("P_k vanishes but no +1 eigenvalue" + where);
        if (r.plus_one && std::abs(r.Pk) > loose) throw ConsistencyError("+1 eigenvalue with non-vanishing P_k" + where);
        if (r.minus_one && std::abs(r.Jk) > loose) throw ConsistencyError("-1 eigenvalue with non-vanishing J_k" + where);
        rows.push_back(r);
    }
    return rows;
}

inline void write_scan_csv(std::ostream& os, const std::vector<UnitScanRow>& rows) {
    os << "k,gAtA,gBtB,Pk,Jk,max_abs_eig\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k, r.ga_ta, r.gb_tb, r.Pk, r.Jk, r.max_abs_eig);
        os << buf;
    }
}

} // namespace zdistill::appendix
