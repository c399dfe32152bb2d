#pragma once

// Dense complex linear algebra used throughout: Hermitian propagators,
// pure/mixed states, and the biorthogonal spectral decomposition of the
// (non-Hermitian) kept-outcome operator.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "zdistill/error.hpp"

namespace zdistill {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kDegeneracyTol = 1e-9;
inline constexpr double kBiorthogonalTol = 1e-9;
inline constexpr double kStateTol = 1e-10;

inline bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

inline void require_finite(const ComplexMatrix& m, const char* what) {
    if (!all_finite(m)) {
        throw InvariantViolation(std::string(what) + ": non-finite entry");
    }
}

inline void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw DimensionMismatch(std::string(what) + ": matrix must be square and non-empty");
    }
}

inline double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// HermitianOperator

/// A Hamiltonian (energy, hbar = 1). Construction enforces
/// max|A - A^dagger| <= 1e-12 and stores the exactly Hermitian part.
class HermitianOperator {
public:
    HermitianOperator() = default;

    explicit HermitianOperator(ComplexMatrix m) {
        require_square(m, "HermitianOperator");
        require_finite(m, "HermitianOperator");
        const double asym = max_abs(m - m.adjoint());
        if (asym > kHermitianTol) {
            throw InvariantViolation("HermitianOperator: |A - A^dagger|_max = " +
                                     std::to_string(asym) + " exceeds 1e-12");
        }
        matrix_ = 0.5 * (m + m.adjoint());
    }

    static HermitianOperator zero(Index dim) {
        return HermitianOperator(ComplexMatrix::Zero(dim, dim));
    }

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }

    HermitianOperator operator+(const HermitianOperator& other) const {
        if (other.dim() != dim()) throw DimensionMismatch("HermitianOperator: dimension mismatch in sum");
        return HermitianOperator(matrix_ + other.matrix_);
    }

    HermitianOperator operator*(double s) const { return HermitianOperator(matrix_ * s); }

private:
    ComplexMatrix matrix_;
};

/// U = exp(-i H t), through the eigendecomposition of H so that U is unitary
/// to rounding.
inline ComplexMatrix hermitian_matexp(const HermitianOperator& h, double t) {
    if (!std::isfinite(t)) throw PreconditionError("hermitian_matexp: non-finite time");
    if (h.dim() == 0) throw DimensionMismatch("hermitian_matexp: empty operator");
    if (t == 0.0) return ComplexMatrix::Identity(h.dim(), h.dim());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) {
        throw Error("hermitian_matexp: eigensolver failed");
    }
    const Eigen::VectorXd& energies = solver.eigenvalues();
    ComplexVector phases(energies.size());
    for (Index k = 0; k < energies.size(); ++k) {
        phases(k) = std::exp(-kI * energies(k) * t);
    }
    const ComplexMatrix& q = solver.eigenvectors();
    return q * phases.asDiagonal() * q.adjoint();
}

// ---------------------------------------------------------------------------
// States

/// Unit-norm state vector.
class PureState {
public:
    PureState() = default;

    /// Normalizes `v`; a zero vector is rejected.
    explicit PureState(const ComplexVector& v) {
        if (v.size() == 0 || !v.allFinite()) throw InvariantViolation("PureState: empty or non-finite vector");
        const double norm = v.norm();
        if (norm < 1e-300) throw InvariantViolation("PureState: zero vector");
        vector_ = v / norm;
    }

    static PureState basis(Index dim, Index k) {
        ComplexVector v = ComplexVector::Zero(dim);
        v(k) = 1.0;
        return PureState(v);
    }

    const ComplexVector& vector() const noexcept { return vector_; }
    Index dim() const noexcept { return vector_.size(); }

    ComplexMatrix projector() const { return vector_ * vector_.adjoint(); }

    /// |<this|other>|, the global-phase-free comparison.
    double overlap(const PureState& other) const {
        if (other.dim() != dim()) throw DimensionMismatch("PureState::overlap");
        return std::abs(vector_.dot(other.vector_));
    }

private:
    ComplexVector vector_;
};

/// Mixed state: Hermitian, unit trace, positive semidefinite (all within 1e-10).
class DensityMatrix {
public:
    DensityMatrix() = default;

    explicit DensityMatrix(const ComplexMatrix& m) {
        require_square(m, "DensityMatrix");
        require_finite(m, "DensityMatrix");
        if (max_abs(m - m.adjoint()) > kStateTol) {
            throw InvariantViolation("DensityMatrix: not Hermitian");
        }
        matrix_ = 0.5 * (m + m.adjoint());
        const double tr = matrix_.trace().real();
        if (std::abs(tr - 1.0) > kStateTol) {
            throw InvariantViolation("DensityMatrix: trace " + std::to_string(tr) + " != 1");
        }
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -kStateTol) {
            throw InvariantViolation("DensityMatrix: negative eigenvalue");
        }
    }

    /// Hermitizes and divides by the trace before validating.
    static DensityMatrix normalized(const ComplexMatrix& m) {
        require_square(m, "DensityMatrix::normalized");
        const ComplexMatrix h = 0.5 * (m + m.adjoint());
        const double tr = h.trace().real();
        if (!(tr > 0.0)) throw InvariantViolation("DensityMatrix::normalized: non-positive trace");
        return DensityMatrix(h / tr);
    }

    static DensityMatrix maximally_mixed(Index dim) {
        return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    static DensityMatrix pure(const PureState& psi) { return DensityMatrix(psi.projector()); }

    /// Diagonal state from non-negative weights, normalized to unit sum.
    static DensityMatrix diagonal(const std::vector<double>& weights) {
        if (weights.empty()) throw InvariantViolation("DensityMatrix::diagonal: no weights");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw InvariantViolation("DensityMatrix::diagonal: weights must be finite and >= 0");
            sum += w;
        }
        if (!(sum > 0.0)) throw InvariantViolation("DensityMatrix::diagonal: weights sum to zero");
        ComplexMatrix m = ComplexMatrix::Zero(static_cast<Index>(weights.size()), static_cast<Index>(weights.size()));
        for (std::size_t k = 0; k < weights.size(); ++k) m(static_cast<Index>(k), static_cast<Index>(k)) = weights[k] / sum;
        return DensityMatrix(m);
    }

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }

    double purity() const { return (matrix_ * matrix_).trace().real(); }

    /// <psi|rho|psi>
    double expectation(const PureState& psi) const {
        if (psi.dim() != dim()) throw DimensionMismatch("DensityMatrix::expectation");
        return psi.vector().dot(matrix_ * psi.vector()).real();
    }

private:
    ComplexMatrix matrix_;
};

// ---------------------------------------------------------------------------
// Spectral decomposition

/// Eigenvalues sorted by descending magnitude with biorthogonal right/left
/// eigenvectors: V u_n = lambda_n u_n, <v_n| V = lambda_n <v_n|,
/// <v_n|u_m> = delta_nm, |u_n| = 1.
struct SpectralData {
    std::vector<Complex> eigenvalues;
    ComplexMatrix right; ///< column n is u_n
    ComplexMatrix left;  ///< row n is the covector <v_n|
    double dominant_gap = 0.0;

    Index size() const noexcept { return static_cast<Index>(eigenvalues.size()); }

    ComplexVector u(Index n) const { return right.col(n); }
    /// The ket |v_n> (so that <v_n|x> = v(n).dot(x)).
    ComplexVector v(Index n) const { return left.row(n).adjoint(); }

    ComplexMatrix reconstruct() const {
        ComplexVector lam(size());
        for (Index k = 0; k < size(); ++k) lam(k) = eigenvalues[static_cast<std::size_t>(k)];
        return right * lam.asDiagonal() * left;
    }

    /// sum_n lambda_n^N |u_n><v_n|
    ComplexMatrix power(long n_power) const {
        ComplexVector lam(size());
        for (Index k = 0; k < size(); ++k) {
            Complex p = 1.0;
            for (long j = 0; j < n_power; ++j) p *= eigenvalues[static_cast<std::size_t>(k)];
            lam(k) = p;
        }
        return right * lam.asDiagonal() * left;
    }
};

namespace detail {

// Union-find grouping of eigenvalues closer than `tol`.
inline std::vector<std::vector<Index>> cluster_eigenvalues(const ComplexVector& lam, double tol) {
    const Index n = lam.size();
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
            i = parent[static_cast<std::size_t>(i)];
        }
        return i;
    };
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (std::abs(lam(i) - lam(j)) <= tol) {
                const Index a = find(i), b = find(j);
                if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            }
        }
    }
    std::vector<std::vector<Index>> groups;
    std::vector<Index> slot(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
        const Index r = find(i);
        if (slot[static_cast<std::size_t>(r)] < 0) {
            slot[static_cast<std::size_t>(r)] = static_cast<Index>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(i);
    }
    return groups;
}

// Fix the global phase so the largest-magnitude component is real positive.
inline void canonical_phase(Eigen::Ref<ComplexVector> v) {
    Index arg = 0;
    double best = -1.0;
    for (Index k = 0; k < v.size(); ++k) {
        const double a = std::abs(v(k));
        if (a > best + 1e-12) {
            best = a;
            arg = k;
        }
    }
    if (best > 0.0) v *= std::conj(v(arg)) / best;
}

// Descending |lambda|; magnitudes within the degeneracy tolerance are ordered
// by descending real part, then descending imaginary part.
inline std::vector<Index> spectral_order(const std::vector<Complex>& lam) {
    std::vector<Index> order(lam.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::abs(lam[static_cast<std::size_t>(a)]) > std::abs(lam[static_cast<std::size_t>(b)]);
    });
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        while (end < order.size() &&
               std::abs(lam[static_cast<std::size_t>(order[end - 1])]) -
                       std::abs(lam[static_cast<std::size_t>(order[end])]) <=
                   kDegeneracyTol) {
            ++end;
        }
        std::stable_sort(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(end),
                         [&](Index a, Index b) {
                             const Complex x = lam[static_cast<std::size_t>(a)];
                             const Complex y = lam[static_cast<std::size_t>(b)];
                             if (x.real() != y.real()) return x.real() > y.real();
                             return x.imag() > y.imag();
                         });
        start = end;
    }
    return order;
}

} // namespace detail

/// Eigenvalues only (no ordering guarantees beyond descending magnitude).
inline std::vector<Complex> eigenvalues(const ComplexMatrix& v) {
    require_square(v, "eigenvalues");
    require_finite(v, "eigenvalues");
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(v, false);
    if (solver.info() != Eigen::Success) throw Error("eigenvalues: eigensolver did not converge");
    std::vector<Complex> out(solver.eigenvalues().data(), solver.eigenvalues().data() + v.rows());
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
    return out;
}

inline double spectral_radius(const ComplexMatrix& v) {
    return std::abs(eigenvalues(v).front());
}

/// Biorthogonal eigendecomposition V = sum_n lambda_n |u_n><v_n|.
///
/// Eigenvalues closer than 1e-9 (scaled by max(1, |V|_max)) are treated as one
/// degenerate cluster whose right eigenvectors are taken as an orthonormal
/// null-space basis of V - mu; a cluster whose geometric multiplicity falls
/// short of its size is defective and raises NonDiagonalizable. Left vectors
/// are the rows of the inverse eigenvector matrix, and the result is checked
/// for biorthogonality and reconstruction to 1e-9.
inline SpectralData spectral_decompose(const ComplexMatrix& v) {
    require_square(v, "spectral_decompose");
    require_finite(v, "spectral_decompose");
    const Index n = v.rows();
    const double scale = std::max(1.0, max_abs(v));

    Eigen::ComplexEigenSolver<ComplexMatrix> solver(v, true);
    if (solver.info() != Eigen::Success) {
        throw NonDiagonalizable("eigenvalue iteration did not converge");
    }
    ComplexVector lam = solver.eigenvalues();
    ComplexMatrix right = solver.eigenvectors();

    for (const auto& group : detail::cluster_eigenvalues(lam, kDegeneracyTol * scale)) {
        const Index m = static_cast<Index>(group.size());
        Complex mu = 0.0;
        for (Index k : group) mu += lam(k);
        mu /= static_cast<double>(m);

        if (m == 1) {
            ComplexVector u = right.col(group.front());
            const double norm = u.norm();
            if (!(norm > 0.0)) throw NonDiagonalizable("zero eigenvector");
            u /= norm;
            detail::canonical_phase(u);
            if ((v * u - mu * u).cwiseAbs().maxCoeff() > kBiorthogonalTol * scale) {
                throw NonDiagonalizable("eigenvector residual exceeds tolerance");
            }
            right.col(group.front()) = u;
            continue;
        }

        const ComplexMatrix shifted = v - mu * ComplexMatrix::Identity(n, n);
        Eigen::JacobiSVD<ComplexMatrix> svd(shifted, Eigen::ComputeFullV);
        const Eigen::VectorXd& sigma = svd.singularValues();
        if (sigma(n - m) > kBiorthogonalTol * scale) {
            throw NonDiagonalizable("eigenvalue " + std::to_string(mu.real()) + (mu.imag() < 0 ? "" : "+") +
                                    std::to_string(mu.imag()) + "i has algebraic multiplicity " +
                                    std::to_string(m) + " but fewer independent eigenvectors");
        }
        for (Index j = 0; j < m; ++j) {
            lam(group[static_cast<std::size_t>(j)]) = mu;
            right.col(group[static_cast<std::size_t>(j)]) = svd.matrixV().col(n - m + j);
        }
    }

    Eigen::FullPivLU<ComplexMatrix> lu(right);
    if (!lu.isInvertible()) throw NonDiagonalizable("eigenvectors are linearly dependent");
    ComplexMatrix left = lu.inverse();

    std::vector<Complex> lam_list(lam.data(), lam.data() + n);
    const std::vector<Index> order = detail::spectral_order(lam_list);

    SpectralData out;
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.right.resize(n, n);
    out.left.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        const Index src = order[static_cast<std::size_t>(k)];
        out.eigenvalues[static_cast<std::size_t>(k)] = lam(src);
        out.right.col(k) = right.col(src);
        out.left.row(k) = left.row(src);
    }
    const double lead = std::abs(out.eigenvalues.front());
    out.dominant_gap = (n > 1 && lead > 0.0) ? std::abs(out.eigenvalues[1]) / lead : 0.0;

    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    if (max_abs(out.left * out.right - id) > kBiorthogonalTol ||
        max_abs(out.right * out.left - id) > kBiorthogonalTol) {
        throw NonDiagonalizable("biorthogonality residual exceeds 1e-9");
    }
    if (max_abs(out.reconstruct() - v) > kBiorthogonalTol * scale) {
        throw NonDiagonalizable("reconstruction residual exceeds 1e-9");
    }
    return out;
}

// ---------------------------------------------------------------------------

struct PowerResult {
    ComplexMatrix matrix; ///< V^N rho V^dagger^N, unnormalized
    double trace = 1.0;   ///< P(N), the probability of N kept outcomes
};

/// Applies the kept-outcome map N times without renormalizing.
inline PowerResult power_apply(const ComplexMatrix& v, const DensityMatrix& rho, long n_cycles) {
    require_square(v, "power_apply");
    if (v.rows() != rho.dim()) throw DimensionMismatch("power_apply: operator and state dimensions differ");
    if (n_cycles < 0) throw PreconditionError("power_apply: N must be >= 0");
    ComplexMatrix m = rho.matrix();
    for (long k = 0; k < n_cycles; ++k) m = v * m * v.adjoint();
    return {m, m.trace().real()};
}

} // namespace zdistill
