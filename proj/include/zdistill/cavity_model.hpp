#pragma once

// Two single-mode cavities a, b and a two-level atom X in the rotating-wave
// (Jaynes-Cummings) coupling. The two-mode space is truncated to n + m <= K;
// since every Hamiltonian here conserves the excitation number, sectors
// k <= K are represented exactly.
//
// Two-mode basis order: sector k = 0, 1, ..., K, inside a sector
// |k,0>, |k-1,1>, ..., |0,k>. Full space: mediator (x) modes, up = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "zdistill/error.hpp"
#include "zdistill/linalg.hpp"
#include "zdistill/protocol.hpp"

namespace zdistill::cavity {

struct CavityParams {
    double omega = 1.0;
    double g_a = 1.0, g_b = 1.0;
    double t_a = 1.0, t_b = 1.0;
    double tau_a = 0.0, tau_b = 0.0;
    int k_max = 12;

    double T() const { return t_a + tau_a + t_b + tau_b; }
    double ga_ta() const { return g_a * t_a; }
    double gb_tb() const { return g_b * t_b; }

    void validate() const {
        for (double v : {omega, g_a, g_b, t_a, t_b, tau_a, tau_b}) {
            if (!std::isfinite(v) || v < 0.0) throw InvariantViolation("CavityParams: values must be finite and >= 0");
        }
        if (k_max < 1) throw InvariantViolation("CavityParams: k_max must be >= 1");
        if (k_max > 40) throw InvariantViolation("CavityParams: k_max above 40 is not supported");
    }
};

struct FockLabel {
    int n = 0;
    int m = 0;
    bool operator==(const FockLabel&) const = default;
};

class FockBasis {
public:
    explicit FockBasis(int k_max) : k_max_(k_max) {
        if (k_max < 0) throw PreconditionError("FockBasis: negative cutoff");
    }

    int k_max() const noexcept { return k_max_; }
    Index size() const noexcept { return static_cast<Index>(k_max_ + 1) * (k_max_ + 2) / 2; }
    static Index sector_offset(int k) { return static_cast<Index>(k) * (k + 1) / 2; }

    Index index(int n, int m) const {
        const int k = n + m;
        if (n < 0 || m < 0 || k > k_max_) throw PreconditionError("FockBasis: label outside the truncated space");
        return sector_offset(k) + (k - n);
    }

    FockLabel label(Index i) const {
        if (i < 0 || i >= size()) throw PreconditionError("FockBasis: index out of range");
        int k = 0;
        while (sector_offset(k + 1) <= i) ++k;
        const int r = static_cast<int>(i - sector_offset(k));
        return {k - r, r};
    }

private:
    int k_max_;
};

// ---------------------------------------------------------------------------
// Angles and sector coefficients, in terms of the products A = g_A t_A and
// B = g_B t_B.

inline double phi(double gt, int level) { return gt * std::sqrt(static_cast<double>(level)); }

/// c_j of sector k, 0 <= j <= k.
inline double c_coeff(int j, int k, double a, double b) {
    const double sa = std::sin(phi(a, j)), ca = std::cos(phi(a, j));
    const double sb0 = std::sin(phi(b, k - j)), cb1 = std::cos(phi(b, k - j + 1));
    return sa * sa * cb1 * cb1 + ca * ca * sb0 * sb0;
}

/// d_j of sector k, 1 <= j <= k; couples |j-1, k-j+1> and |j, k-j>.
inline double d_coeff(int j, int k, double a, double b) {
    return std::sin(phi(a, j)) * std::cos(phi(a, j - 1)) * std::sin(phi(b, k - j + 1)) * std::cos(phi(b, k - j + 1));
}

inline bool coupling_condition(const CavityParams& p, double tol = 1e-9) {
    return std::abs(std::abs(std::sin(p.ga_ta())) - 1.0) <= tol;
}

inline void require_coupling_condition(const CavityParams& p) {
    if (!coupling_condition(p)) throw PreconditionError("coupling condition sin(g_A t_A) = +-1 not met");
}

/// Startup check for scan values of g_B t_B: sin and cos of phi_B^(j) stay
/// away from zero for 1 <= j <= k_max.
inline void require_generic(double gb_tb, int k_max, double tol = 1e-9) {
    for (int j = 1; j <= k_max; ++j) {
        const double x = phi(gb_tb, j);
        if (std::abs(std::sin(x)) <= tol || std::abs(std::cos(x)) <= tol) {
            throw PreconditionError("g_B t_B = " + std::to_string(gb_tb) + " is fine-tuned at level " + std::to_string(j));
        }
    }
}

// ---------------------------------------------------------------------------
// Hamiltonians and programs

inline ModelBinding binding(const CavityParams& p) {
    p.validate();
    const FockBasis basis(p.k_max);
    const Index d = basis.size();
    ComplexMatrix h0 = ComplexMatrix::Zero(2 * d, 2 * d);
    ComplexMatrix ha = ComplexMatrix::Zero(2 * d, 2 * d);
    ComplexMatrix hb = ComplexMatrix::Zero(2 * d, 2 * d);
    for (Index i = 0; i < d; ++i) {
        const auto [n, m] = basis.label(i);
        h0(i, i) = p.omega * (1 + n + m);
        h0(d + i, d + i) = p.omega * (n + m);
        // sigma_+ a : |down, n, m> -> |up, n-1, m>
        if (n >= 1) {
            const Index j = basis.index(n - 1, m);
            ha(j, d + i) = ha(d + i, j) = p.g_a * std::sqrt(static_cast<double>(n));
        }
        if (m >= 1) {
            const Index j = basis.index(n, m - 1);
            hb(j, d + i) = hb(d + i, j) = p.g_b * std::sqrt(static_cast<double>(m));
        }
    }
    ModelBinding b;
    b.mediator = "X";
    ComplexVector up(2), down(2);
    up << 1.0, 0.0;
    down << 0.0, 1.0;
    b.mediator_states["up"] = up;
    b.mediator_states["down"] = down;
    b.rest_dim = d;
    b.free_hamiltonian = HermitianOperator(h0);
    b.interactions["A"] = HermitianOperator(ha);
    b.interactions["B"] = HermitianOperator(hb);
    return b;
}

/// Out through A then B, keep up, back through B then A, keep down.
inline ProtocolProgram round_trip_program(const CavityParams& p) {
    p.validate();
    return ProgramBuilder("X")
        .prepare("down")
        .interact("A", p.t_a)
        .free(p.tau_a)
        .interact("B", p.t_b)
        .free(p.tau_b)
        .project("up")
        .free(p.tau_b)
        .interact("B", p.t_b)
        .free(p.tau_a)
        .interact("A", p.t_a)
        .project("down")
        .build();
}

/// The same sequence with the mediator states exchanged. Kept for the
/// negative check that the two-mode vacuum then survives as an eigenstate.
inline ProtocolProgram round_trip_up_program(const CavityParams& p) {
    p.validate();
    return ProgramBuilder("X")
        .prepare("up")
        .interact("A", p.t_a)
        .free(p.tau_a)
        .interact("B", p.t_b)
        .free(p.tau_b)
        .project("down")
        .free(p.tau_b)
        .interact("B", p.t_b)
        .free(p.tau_a)
        .interact("A", p.t_a)
        .project("up")
        .build();
}

/// Conditional cycle used to empty cavity B.
inline ProtocolProgram b_preparation_program(const CavityParams& p) {
    p.validate();
    return ProgramBuilder("X").prepare("down").interact("B", p.t_b).project("down").build();
}

enum class Side { A, B };

/// exp(-i (H0 + H'_X,side) t_side) on the truncated full space, assembled
/// doublet by doublet. Up states in the top sector have no partner inside
/// the truncation and only pick up their phase.
inline ComplexMatrix jc_propagator(Side side, const CavityParams& p) {
    p.validate();
    const FockBasis basis(p.k_max);
    const Index d = basis.size();
    const double gt = side == Side::A ? p.ga_ta() : p.gb_tb();
    const double t = side == Side::A ? p.t_a : p.t_b;
    ComplexMatrix u = ComplexMatrix::Zero(2 * d, 2 * d);
    for (Index i = 0; i < d; ++i) {
        const auto [n, m] = basis.label(i);
        const int own = side == Side::A ? n : m;
        const Complex ph = std::exp(-kI * p.omega * static_cast<double>(n + m) * t);
        if (own == 0) {
            u(d + i, d + i) = ph;
        } else {
            const Index j = side == Side::A ? basis.index(n - 1, m) : basis.index(n, m - 1);
            const double a = phi(gt, own);
            u(j, j) = u(d + i, d + i) = ph * std::cos(a);
            u(j, d + i) = u(d + i, j) = -kI * ph * std::sin(a);
        }
        if (n + m == p.k_max) u(i, i) = std::exp(-kI * p.omega * static_cast<double>(n + m + 1) * t);
    }
    return u;
}

/// Closed form of the two-mode cycle operator: per sector k the real
/// tridiagonal c/d matrix times -e^{-2ik omega T}.
inline CompiledCycle build_Vc_closed(const CavityParams& p) {
    p.validate();
    const FockBasis basis(p.k_max);
    const Index d = basis.size();
    const double a = p.ga_ta(), b = p.gb_tb();
    auto sa = [a](int n) { return std::sin(phi(a, n)); };
    auto ca = [a](int n) { return std::cos(phi(a, n)); };
    auto sb = [b](int m) { return std::sin(phi(b, m)); };
    auto cb = [b](int m) { return std::cos(phi(b, m)); };

    ComplexMatrix v = ComplexMatrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
        const auto [n, m] = basis.label(i);
        const Complex ph = -std::exp(-2.0 * kI * static_cast<double>(n + m) * p.omega * p.T());
        v(i, i) += ph * (sa(n) * sa(n) * cb(m + 1) * cb(m + 1) + ca(n) * ca(n) * sb(m) * sb(m));
        if (m >= 1) v(basis.index(n + 1, m - 1), i) += ph * sa(n + 1) * ca(n) * sb(m) * cb(m);
        if (n >= 1) v(basis.index(n - 1, m + 1), i) += ph * sa(n) * ca(n - 1) * sb(m + 1) * cb(m + 1);
    }
    return CompiledCycle(std::move(v), round_trip_program(p));
}

/// Restriction of a two-mode operator to sector k.
inline ComplexMatrix sector_block(const ComplexMatrix& v, int k) {
    const Index off = FockBasis::sector_offset(k);
    if (off + k + 1 > v.rows()) throw PreconditionError("sector_block: sector outside the operator");
    return v.block(off, off, k + 1, k + 1);
}

/// Embeds a sector-k vector (ordered |k,0>..|0,k>) into the truncated space.
inline ComplexVector embed_sector(const ComplexVector& s, int k, int k_max) {
    const FockBasis basis(k_max);
    if (s.size() != k + 1 || k > k_max) throw DimensionMismatch("embed_sector: wrong sector size");
    ComplexVector out = ComplexVector::Zero(basis.size());
    out.segment(FockBasis::sector_offset(k), k + 1) = s;
    return out;
}

// ---------------------------------------------------------------------------

struct SectorMatrix {
    int k = 0;
    Eigen::MatrixXd entries; ///< rows/cols |k,0>, ..., |0,k>
    std::vector<double> c;   ///< c_k, ..., c_0
    std::vector<double> d;   ///< d_k, ..., d_1
    Complex phase;           ///< -e^{-2ik omega T}

    double c_at(int j) const { return c.at(static_cast<std::size_t>(k - j)); }
    double d_at(int j) const { return d.at(static_cast<std::size_t>(k - j)); }

    ComplexMatrix full() const { return phase * entries.cast<Complex>(); }

    /// Block on {|k,0>, ..., |2,k-2>}, which decouples when d_2 = 0.
    Eigen::MatrixXd upper_subsector() const { return entries.topLeftCorner(k - 1, k - 1); }
};

inline SectorMatrix sector_matrix(int k, const CavityParams& p) {
    p.validate();
    if (k < 1 || k > p.k_max) throw PreconditionError("sector_matrix: k = " + std::to_string(k) + " outside 1.." + std::to_string(p.k_max));
    SectorMatrix s;
    s.k = k;
    s.phase = -std::exp(-2.0 * kI * static_cast<double>(k) * p.omega * p.T());
    s.entries = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int r = 0; r <= k; ++r) {
        const int j = k - r;
        s.c.push_back(c_coeff(j, k, p.ga_ta(), p.gb_tb()));
        s.entries(r, r) = s.c.back();
        if (j >= 1) {
            s.d.push_back(d_coeff(j, k, p.ga_ta(), p.gb_tb()));
            s.entries(r, r + 1) = s.entries(r + 1, r) = s.d.back();
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

struct DoubletReport {
    int sign = 1;                 ///< sin(g_A t_A)
    Complex eigenvalue;           ///< -e^{-2i omega T}
    Complex trace_eigenvalue;     ///< phase * trace of the k = 1 block
    PureState eigenvector;        ///< on {|1,0>, |0,1>}
    PureState zero_vector;
    double eigen_residual = 0.0;
    double zero_residual = 0.0;
    bool product_state = false;   ///< cos or sin of phi_B^(1) vanishes
};

inline DoubletReport doublet_analysis(const CavityParams& p) {
    require_coupling_condition(p);
    const SectorMatrix s = sector_matrix(1, p);
    const double b1 = phi(p.gb_tb(), 1);
    DoubletReport r;
    r.sign = std::sin(p.ga_ta()) > 0.0 ? 1 : -1;
    r.eigenvalue = s.phase;
    r.trace_eigenvalue = s.phase * s.entries.trace();
    ComplexVector u(2), z(2);
    u << std::cos(b1), static_cast<double>(r.sign) * std::sin(b1);
    z << -static_cast<double>(r.sign) * std::sin(b1), std::cos(b1);
    r.eigenvector = PureState(u);
    r.zero_vector = PureState(z);
    const ComplexMatrix v = s.full();
    r.eigen_residual = (v * r.eigenvector.vector() - r.eigenvalue * r.eigenvector.vector()).cwiseAbs().maxCoeff();
    r.zero_residual = (v * r.zero_vector.vector()).cwiseAbs().maxCoeff();
    r.product_state = std::abs(std::cos(b1)) <= 1e-9 || std::abs(std::sin(b1)) <= 1e-9;
    return r;
}

/// cos phi_B^(k) |1,k-1> + sign sin phi_B^(k) |0,k> in the truncated space,
/// verified against the closed-form operator.
inline PureState target_state(const CavityParams& p, int k) {
    require_coupling_condition(p);
    if (k < 1 || k > p.k_max) throw PreconditionError("target_state: k = " + std::to_string(k) + " outside 1.." + std::to_string(p.k_max));
    const FockBasis basis(p.k_max);
    const double sign = std::sin(p.ga_ta()) > 0.0 ? 1.0 : -1.0;
    const double bk = phi(p.gb_tb(), k);
    ComplexVector v = ComplexVector::Zero(basis.size());
    v(basis.index(1, k - 1)) = std::cos(bk);
    v(basis.index(0, k)) = sign * std::sin(bk);
    const PureState psi(v);
    const Complex lam = -std::exp(-2.0 * kI * static_cast<double>(k) * p.omega * p.T());
    const ComplexMatrix vc = build_Vc_closed(p).matrix;
    const double res = (vc * psi.vector() - lam * psi.vector()).cwiseAbs().maxCoeff();
    if (res > 1e-9) throw InvariantViolation("target_state: eigen-equation residual " + std::to_string(res));
    return psi;
}

// ---------------------------------------------------------------------------

struct Preparation {
    DensityMatrix state;
    double yield = 1.0;
    double residual = 0.0; ///< weight outside m = 0
};

/// Weight of the state on two-mode labels with m >= 1.
inline double b_excited_weight(const DensityMatrix& rho, int k_max) {
    const FockBasis basis(k_max);
    double w = 0.0;
    for (Index i = 0; i < basis.size(); ++i) {
        if (basis.label(i).m >= 1) w += rho.matrix()(i, i).real();
    }
    return w;
}

/// Repeats the B-only conditional cycle `reps` times with renormalization.
inline Preparation prepare_initial_state(const DensityMatrix& rho, const CavityParams& p, int reps) {
    p.validate();
    if (reps < 0) throw PreconditionError("prepare_initial_state: reps must be >= 0");
    const FockBasis basis(p.k_max);
    if (rho.dim() != basis.size()) throw DimensionMismatch("prepare_initial_state: state does not match the truncation");
    for (Index i = 0; i < basis.size(); ++i) {
        const int m = basis.label(i).m;
        if (m >= 1 && rho.matrix()(i, i).real() > 1e-15 && std::abs(std::sin(phi(p.gb_tb(), m))) <= 1e-9) {
            throw PreconditionError("prepare_initial_state: g_B t_B is fine-tuned at occupied level m = " + std::to_string(m));
        }
    }
    const ComplexMatrix v = compile_cycle(b_preparation_program(p), binding(p)).matrix;
    Preparation out;
    DensityMatrix cur = rho;
    for (int r = 0; r < reps; ++r) {
        const ComplexMatrix next = v * cur.matrix() * v.adjoint();
        const double pr = next.trace().real();
        out.yield *= pr;
        if (!(pr > 0.0) || !(out.yield >= 1e-300)) throw YieldUnderflow(r);
        cur = DensityMatrix::normalized(next);
    }
    out.state = cur;
    out.residual = b_excited_weight(cur, p.k_max);
    return out;
}

// ---------------------------------------------------------------------------

struct SectorReport {
    int k = 0;
    std::vector<double> eigenvalue_magnitudes;       ///< descending
    std::vector<ComplexVector> unit_eigenvectors;    ///< sector basis
    bool split = false;                              ///< d_2 = 0
    double upper_max_abs = 0.0;                      ///< max |eig| on {|k,0>..|2,k-2>}
};

inline SectorReport sector_report(const CavityParams& p, int k) {
    const SectorMatrix s = sector_matrix(k, p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.entries);
    SectorReport r;
    r.k = k;
    std::vector<std::pair<double, Index>> mags;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) mags.emplace_back(std::abs(es.eigenvalues()(i)), i);
    std::stable_sort(mags.begin(), mags.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    for (const auto& [mag, i] : mags) {
        r.eigenvalue_magnitudes.push_back(mag);
        if (std::abs(mag - 1.0) <= 1e-9) {
            ComplexVector u = es.eigenvectors().col(i).cast<Complex>();
            zdistill::detail::canonical_phase(u);
            r.unit_eigenvectors.push_back(u);
        }
    }
    r.split = k >= 2 && std::abs(s.d_at(2)) <= 1e-12;
    if (k >= 2) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sub(s.upper_subsector(), Eigen::EigenvaluesOnly);
        r.upper_max_abs = sub.eigenvalues().cwiseAbs().maxCoeff();
    }
    return r;
}

} // namespace zdistill::cavity
