#pragma once

// Three two-level systems: mediator X and targets A, B, all with gap omega,
// coupled through sigma_1 (x) sigma_1 terms. Rest-space ordering is
// |a b> -> 2a + b with up = 0, down = 1.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "zdistill/bisection.hpp"
#include "zdistill/error.hpp"
#include "zdistill/linalg.hpp"
#include "zdistill/protocol.hpp"
#include "zdistill/purification.hpp"

namespace zdistill::qubit {

struct QubitParams {
    double omega = 1.0;
    double g_a = 1.0, g_b = 1.0;
    double t_a = 1.0, t_b = 1.0;
    double tau_a = 0.0, tau_b = 0.0;

    /// Finite and non-negative. Zero couplings or times are accepted so the
    /// degenerate limits stay computable.
    void validate() const {
        for (double v : {omega, g_a, g_b, t_a, t_b, tau_a, tau_b}) {
            if (!std::isfinite(v) || v < 0.0) throw InvariantViolation("QubitParams: values must be finite and >= 0");
        }
    }

    bool symmetric(double tol = 1e-12) const {
        return std::abs(g_a - g_b) <= tol && std::abs(t_a - t_b) <= tol && std::abs(tau_a - tau_b) <= tol;
    }
};

struct QubitAngles {
    double phi_a = 0.0, phi_b = 0.0;
    double sin2theta_a = 0.0, cos2theta_a = 1.0;
    double sin2theta_b = 0.0, cos2theta_b = 1.0;
};

inline QubitAngles angles(const QubitParams& p) {
    p.validate();
    QubitAngles a;
    const double ra = std::hypot(p.omega, p.g_a);
    const double rb = std::hypot(p.omega, p.g_b);
    a.phi_a = p.t_a * ra;
    a.phi_b = p.t_b * rb;
    if (ra > 0.0) {
        a.sin2theta_a = p.g_a / ra;
        a.cos2theta_a = p.omega / ra;
    }
    if (rb > 0.0) {
        a.sin2theta_b = p.g_b / rb;
        a.cos2theta_b = p.omega / rb;
    }
    return a;
}

namespace detail {

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline ComplexMatrix pauli1() {
    ComplexMatrix s(2, 2);
    s << 0, 1, 1, 0;
    return s;
}

inline ComplexMatrix pauli3() {
    ComplexMatrix s(2, 2);
    s << 1, 0, 0, -1;
    return s;
}

inline ComplexVector ket(Complex a, Complex b) {
    ComplexVector v(2);
    v << a, b;
    return v;
}

} // namespace detail

/// H0 = sum_s (omega/2)(1 + sigma_3^(s)), H'_XA = g_A s1 s1 (x) 1,
/// H'_XB = g_B s1 (x) 1 (x) s1 on X (x) A (x) B.
inline ModelBinding binding(const QubitParams& p) {
    p.validate();
    using detail::kron;
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    const ComplexMatrix s1 = detail::pauli1();
    const ComplexMatrix n = 0.5 * (id + detail::pauli3()); // projector on up

    ModelBinding b;
    b.mediator = "X";
    b.mediator_states["up"] = detail::ket(1.0, 0.0);
    b.mediator_states["down"] = detail::ket(0.0, 1.0);
    b.rest_dim = 4;
    b.free_hamiltonian = HermitianOperator(p.omega * (kron(kron(n, id), id) + kron(kron(id, n), id) + kron(kron(id, id), n)));
    b.interactions["A"] = HermitianOperator(p.g_a * kron(kron(s1, s1), id));
    b.interactions["B"] = HermitianOperator(p.g_b * kron(kron(s1, id), s1));
    return b;
}

/// prepare up, X-A for t_A, free tau_A, X-B for t_B, free tau_B, project up.
inline ProtocolProgram one_way_program(const QubitParams& p) {
    p.validate();
    return ProgramBuilder("X").prepare("up").interact("A", p.t_a).free(p.tau_a).interact("B", p.t_b).free(p.tau_b).project("up").build();
}

inline CompiledCycle qubit_operator(const QubitParams& p) { return compile_cycle(one_way_program(p), binding(p)); }

/// sigma_3^(A) sigma_3^(B) on the rest space.
inline ComplexMatrix parity_operator() {
    ComplexMatrix p = ComplexMatrix::Zero(4, 4);
    p(0, 0) = p(3, 3) = 1.0;
    p(1, 1) = p(2, 2) = -1.0;
    return p;
}

// ---------------------------------------------------------------------------
// Closed-form parity blocks

struct ParityBlocks {
    ComplexMatrix m;  ///< even block on {|up up>, |down down>}
    ComplexMatrix n;  ///< odd block on {|up down>, |down up>}
    Complex phase_even;
    Complex phase_odd;

    /// Full 4x4 operator. The blocks are written with kets as rows, so the
    /// matrix element <i|V|j> is phase * block(j, i).
    ComplexMatrix assemble() const {
        ComplexMatrix v = ComplexMatrix::Zero(4, 4);
        const Index even[2] = {0, 3};
        const Index odd[2] = {1, 2};
        for (Index i = 0; i < 2; ++i) {
            for (Index j = 0; j < 2; ++j) {
                v(even[i], even[j]) = phase_even * m(j, i);
                v(odd[i], odd[j]) = phase_odd * n(j, i);
            }
        }
        return v;
    }
};

inline ParityBlocks closed_form_blocks(const QubitParams& p) {
    const QubitAngles a = angles(p);
    const double w = p.omega;
    auto e = [w](double x) { return std::exp(-kI * w * x); };
    const Complex alpha_a = std::cos(a.phi_a) - kI * std::sin(a.phi_a) * a.cos2theta_a;
    const Complex alpha_b = std::cos(a.phi_b) - kI * std::sin(a.phi_b) * a.cos2theta_b;
    const double sa = std::sin(a.phi_a) * a.sin2theta_a;
    const double sb = std::sin(a.phi_b) * a.sin2theta_b;
    const double ca = std::cos(p.g_a * p.t_a), cb = std::cos(p.g_b * p.t_b);
    const double xa = std::sin(p.g_a * p.t_a), xb = std::sin(p.g_b * p.t_b);

    ParityBlocks out;
    out.m.resize(2, 2);
    out.n.resize(2, 2);
    out.m(0, 0) = e(p.t_a + 2 * p.tau_a + p.t_b + 2 * p.tau_b) * alpha_a * alpha_b;
    out.m(0, 1) = -e(p.t_a) * sa * xb;
    out.m(1, 0) = -e(p.t_b + 2 * p.tau_b) * xa * sb;
    out.m(1, 1) = ca * cb;
    out.n(0, 0) = e(2 * p.tau_a + p.t_b) * alpha_a * cb;
    out.n(0, 1) = -sa * sb;
    out.n(1, 0) = -e(p.t_a + 2 * p.tau_a + p.t_b) * xa * xb;
    out.n(1, 1) = e(p.t_a + 2 * p.tau_a) * ca * alpha_b;
    out.phase_even = e(p.t_a + p.tau_a + p.t_b + p.tau_b);
    out.phase_odd = e(p.t_a + p.t_b + 2 * p.tau_b);
    return out;
}

// ---------------------------------------------------------------------------
// Optimal-point solver in (x, y, z) = (g t, omega t, omega tau)

enum class Branch { Primary, Shifted };

inline const char* to_string(Branch b) { return b == Branch::Primary ? "primary" : "shifted"; }

struct OptimalPoint {
    double x = 0.0, y = 0.0, z = 0.0;
    double phi = 0.0; ///< sqrt(x^2 + y^2)
    double chi = 0.0;
    Complex lambda0;
    Branch branch = Branch::Primary;
};

struct RejectedCandidate {
    double x = 0.0, y = 0.0, z = 0.0;
    Branch branch = Branch::Primary;
    std::string reason;
};

struct OptimalSolution {
    double x = 0.0;
    std::vector<OptimalPoint> roots;
    std::vector<RejectedCandidate> rejected;
};

inline constexpr double kCosSinMargin = 1e-6;
inline constexpr double kRootMergeTol = 1e-8;
inline constexpr double kMBlockTol = 1e-9;

/// Modulus condition sin^2(phi) x^2 / phi^2 - sin^2(x).
inline double modulus_residual(double phi, double x) {
    const double s = std::sin(phi);
    return s * s * x * x / (phi * phi) - std::sin(x) * std::sin(x);
}

inline double wrap_2pi(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double z = std::fmod(a, two_pi);
    if (z < 0.0) z += two_pi;
    if (z >= two_pi) z = 0.0;
    return z;
}

/// Symmetric parameters only. Roots of the modulus condition are bracketed
/// on a grid phi = x + i*dphi up to sqrt(x^2 + y_max^2) and bisected; each
/// root yields a primary candidate and a shifted one (omega tau -> omega tau
/// + pi). Candidates with cos(y + z) = +-1 are rejected.
inline OptimalSolution solve_optimal_condition(double x, double y_max = 10.0, double dphi = 0.01) {
    if (!std::isfinite(x) || !(x > 0.0)) throw PreconditionError("solve_optimal_condition: x must be finite and > 0");
    if (!(y_max > 0.0) || !(dphi > 0.0)) throw PreconditionError("solve_optimal_condition: y_max and dphi must be > 0");
    if (!(std::abs(std::cos(x) * std::sin(x)) > kCosSinMargin)) {
        throw PreconditionError("solve_optimal_condition: cos(x) sin(x) vanishes at x = " + std::to_string(x));
    }

    OptimalSolution sol;
    sol.x = x;
    auto f = [x](double phi) { return modulus_residual(phi, x); };
    std::vector<double> phis = grid_roots(f, x + dphi, std::hypot(x, y_max), dphi, 1e-15);
    phis.erase(std::unique(phis.begin(), phis.end(), [](double a, double b) { return std::abs(a - b) <= kRootMergeTol; }),
               phis.end());

    for (double phi : phis) {
        const double y = std::sqrt(std::max(0.0, phi * phi - x * x));
        const Complex w = (std::cos(phi) - kI * std::sin(phi) * (y / phi)) / std::cos(x);
        for (Branch br : {Branch::Primary, Branch::Shifted}) {
            OptimalPoint pt;
            pt.x = x;
            pt.y = y;
            pt.phi = phi;
            pt.branch = br;
            pt.z = wrap_2pi(std::arg(br == Branch::Primary ? -w : w));
            if (y < kRootMergeTol) {
                sol.rejected.push_back({x, y, pt.z, br, "degenerate root y = 0"});
                continue;
            }
            if (std::abs(std::abs(std::cos(y + pt.z)) - 1.0) <= kMBlockTol) {
                sol.rejected.push_back({x, y, pt.z, br, "M-block degeneracy"});
                continue;
            }
            const Complex ph = std::exp(-3.0 * kI * (y + pt.z));
            if (br == Branch::Primary) {
                pt.chi = y + pt.z;
                pt.lambda0 = -ph;
            } else {
                pt.chi = y + pt.z + std::numbers::pi;
                pt.lambda0 = ph;
            }
            sol.roots.push_back(pt);
        }
    }
    return sol;
}

/// omega = 1, t = y, g = x / y, tau = z for both targets.
inline QubitParams params_from_point(const OptimalPoint& pt) {
    if (!(pt.y > 0.0)) throw PreconditionError("params_from_point: y must be > 0");
    QubitParams p;
    p.omega = 1.0;
    p.g_a = p.g_b = pt.x / pt.y;
    p.t_a = p.t_b = pt.y;
    p.tau_a = p.tau_b = pt.z;
    return p;
}

struct TargetState {
    double chi = 0.0;
    PureState state;     ///< (|up down> + e^{i chi}|down up>)/sqrt2
    ComplexVector left;  ///< ket of the left state, <left|state> = 1
};

inline TargetState target_state(double chi) {
    ComplexVector v = ComplexVector::Zero(4);
    v(1) = 1.0 / std::sqrt(2.0);
    v(2) = std::exp(kI * chi) / std::sqrt(2.0);
    TargetState t;
    t.chi = chi;
    t.state = PureState(v);
    t.left = v;
    return t;
}

/// The second odd-sector eigenvalue at a solved point, lambda0 cos(2x).
inline Complex remaining_odd_eigenvalue(const OptimalPoint& pt) { return pt.lambda0 * std::cos(2.0 * pt.x); }

/// Second eigenvalue of the bare odd block N on the primary branch,
/// e^{-i omega (t + tau)} (sin^2 gt - cos^2 gt).
inline Complex n_block_remaining_eigenvalue(const QubitParams& p) {
    const double s = std::sin(p.g_a * p.t_a), c = std::cos(p.g_a * p.t_a);
    return std::exp(-kI * p.omega * (p.t_a + p.tau_a)) * (s * s - c * c);
}

// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string detail;
};

struct DistillationOptions {
    long n_max = 200;
    double fidelity_eps = 1e-6;
    double min_gap = 1e-3;      ///< required 1 - max|other eigenvalue|
    double eigen_tol = 1e-9;
    double prefactor_tol = 1e-6;
    double yield_tol = 1e-4;    ///< |P(n_max) - <Psi|rho0|Psi>|
};

struct DistillationReport {
    OptimalPoint point;
    Complex lambda0_numeric;
    double eigen_residual = 0.0;
    double max_other_abs = 0.0;
    double delta = 0.0;
    long steps_to_fidelity = -1;
    double final_fidelity = 0.0;
    double final_yield = 0.0;
    double expected_yield = 0.0; ///< <Psi|rho0|Psi>
    double prefactor = 0.0;      ///< <v0|rho0|v0> from the decomposition
    std::vector<Check> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
};

inline DistillationReport verify_distillation(const OptimalPoint& pt, const DensityMatrix& rho0,
                                              const DistillationOptions& opt = {}) {
    if (rho0.dim() != 4) throw DimensionMismatch("verify_distillation: initial state must be 4-dimensional");
    const QubitParams p = params_from_point(pt);
    const ComplexMatrix v = qubit_operator(p).matrix;
    const TargetState target = target_state(pt.chi);
    const ComplexVector& psi = target.state.vector();

    DistillationReport r;
    r.point = pt;
    r.eigen_residual = (v * psi - pt.lambda0 * psi).cwiseAbs().maxCoeff();

    const SpectralData sd = spectral_decompose(v);
    Index hit = 0;
    for (Index k = 1; k < sd.size(); ++k) {
        if (std::abs(sd.eigenvalues[static_cast<std::size_t>(k)] - pt.lambda0) <
            std::abs(sd.eigenvalues[static_cast<std::size_t>(hit)] - pt.lambda0)) {
            hit = k;
        }
    }
    r.lambda0_numeric = sd.eigenvalues[static_cast<std::size_t>(hit)];
    for (Index k = 0; k < sd.size(); ++k) {
        if (k != hit) r.max_other_abs = std::max(r.max_other_abs, std::abs(sd.eigenvalues[static_cast<std::size_t>(k)]));
    }
    r.delta = 1.0 - r.max_other_abs;
    const ComplexVector v0 = sd.v(hit);
    r.prefactor = v0.dot(rho0.matrix() * v0).real();
    r.expected_yield = rho0.expectation(target.state);

    const IterationTrace tr = iterate(v, rho0, opt.n_max, target.state);
    for (const auto& row : tr.rows) {
        if (1.0 - row.fidelity <= opt.fidelity_eps) {
            r.steps_to_fidelity = row.n;
            break;
        }
    }
    r.final_fidelity = tr.back().fidelity;
    r.final_yield = tr.back().yield;

    const double dist = std::abs(r.lambda0_numeric - pt.lambda0);
    r.checks.push_back({"eigenvector", r.eigen_residual <= opt.eigen_tol, r.eigen_residual, "|V psi - lambda0 psi|_max"});
    r.checks.push_back({"unit_eigenvalue", dist <= opt.eigen_tol && std::abs(std::abs(pt.lambda0) - 1.0) <= opt.eigen_tol,
                        dist, "distance of lambda0 to the computed spectrum"});
    r.checks.push_back({"spectral_gap", r.delta >= opt.min_gap, r.delta, "1 - max|other eigenvalue|"});
    r.checks.push_back({"fidelity", r.steps_to_fidelity >= 0, static_cast<double>(r.steps_to_fidelity),
                        "first N with 1 - F <= eps, -1 if not reached within n_max"});
    r.checks.push_back({"yield_prefactor", std::abs(r.prefactor - r.expected_yield) <= opt.prefactor_tol,
                        r.prefactor - r.expected_yield, "<v0|rho0|v0> - <Psi|rho0|Psi>"});
    r.checks.push_back({"yield", std::abs(r.final_yield - r.expected_yield) <= opt.yield_tol,
                        r.final_yield - r.expected_yield, "P(n_max) - <Psi|rho0|Psi>"});
    return r;
}

} // namespace zdistill::qubit
