#pragma once

// Repeated kept-outcome cycles: conditional state, yield, fidelity, and the
// large-N characterization through the dominant eigenpair.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "zdistill/error.hpp"
#include "zdistill/linalg.hpp"
#include "zdistill/protocol.hpp"

namespace zdistill {

inline constexpr double kUnderflowYield = 1e-300;
inline constexpr double kOptimalTol = 1e-9;
inline constexpr double kUniqueGapTol = 1e-9;

struct TraceRow {
    long n = 0;
    double yield = 1.0;    ///< P(N)
    double fidelity = 0.0; ///< <target|rho_N|target>
    double purity = 1.0;   ///< Tr rho_N^2
};

struct IterationTrace {
    std::vector<TraceRow> rows;
    DensityMatrix final_state;

    const TraceRow& back() const { return rows.back(); }
};

/// Yield underflow that keeps the rows computed before the failure.
class TraceUnderflow : public YieldUnderflow {
public:
    TraceUnderflow(long last_valid_n, IterationTrace partial)
        : YieldUnderflow(last_valid_n), partial_(std::move(partial)) {}

    const IterationTrace& partial() const noexcept { return partial_; }

private:
    IterationTrace partial_;
};

/// Rows N = 0..n_max. The conditional state is renormalized after every
/// cycle and the yield is accumulated as a running product of the per-cycle
/// traces, so underflow of the unnormalized state never reaches the
/// fidelity.
inline IterationTrace iterate(const ComplexMatrix& v, const DensityMatrix& rho0, long n_max, const PureState& target) {
    require_square(v, "iterate");
    if (v.rows() != rho0.dim() || target.dim() != rho0.dim()) throw DimensionMismatch("iterate: dimensions differ");
    if (n_max < 0) throw PreconditionError("iterate: N_max must be >= 0");

    IterationTrace trace;
    trace.rows.reserve(static_cast<std::size_t>(n_max) + 1);
    DensityMatrix rho = rho0;
    double yield = 1.0;
    trace.rows.push_back({0, yield, rho.expectation(target), rho.purity()});
    for (long n = 1; n <= n_max; ++n) {
        const ComplexMatrix next = v * rho.matrix() * v.adjoint();
        const double p = next.trace().real();
        yield *= p;
        if (!(p > 0.0) || !(yield >= kUnderflowYield)) {
            trace.final_state = rho;
            throw TraceUnderflow(n - 1, std::move(trace));
        }
        rho = DensityMatrix::normalized(next);
        trace.rows.push_back({n, yield, rho.expectation(target), rho.purity()});
    }
    trace.final_state = rho;
    return trace;
}

inline IterationTrace iterate(const CompiledCycle& v, const DensityMatrix& rho0, long n_max, const PureState& target) {
    return iterate(v.matrix, rho0, n_max, target);
}

inline void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
    os << "N,yield,fidelity,purity\n";
    char buf[128];
    for (const auto& r : trace.rows) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g\n", r.n, r.yield, r.fidelity, r.purity);
        os << buf;
    }
}

// ---------------------------------------------------------------------------

struct DominantPair {
    Complex lambda;
    PureState right;
    ComplexVector left; ///< ket |v>, <v|u> = 1
    double weight = 0.0; ///< <v|rho0|v>
};

struct AsymptoticReport {
    Complex lambda0;
    PureState target;     ///< u_0
    ComplexVector left0;  ///< |v_0>
    double prefactor = 0.0;   ///< <v_0|rho0|v_0>
    double abs_lambda0 = 0.0;
    double gap = 0.0;         ///< |lambda_1| / |lambda_0|
    bool optimal = false;     ///< ||lambda_0| - 1| <= 1e-9
    bool unique = false;      ///< gap < 1 - 1e-9
    /// Every eigenpair whose magnitude ties with |lambda_0|; a single entry
    /// when `unique`.
    std::vector<DominantPair> dominant;

    /// Large-N yield prefactor * |lambda_0|^(2N).
    double yield_limit(long n) const { return prefactor * std::pow(abs_lambda0, 2.0 * static_cast<double>(n)); }

    /// Index into `dominant` of the only pair carrying weight above
    /// `rel_tol` times the largest weight, if there is exactly one.
    std::optional<std::size_t> populated_target(double rel_tol = 1e-6) const {
        double wmax = 0.0;
        for (const auto& d : dominant) wmax = std::max(wmax, d.weight);
        if (!(wmax > 0.0)) return std::nullopt;
        std::optional<std::size_t> hit;
        for (std::size_t k = 0; k < dominant.size(); ++k) {
            if (dominant[k].weight > rel_tol * wmax) {
                if (hit) return std::nullopt;
                hit = k;
            }
        }
        return hit;
    }
};

inline AsymptoticReport asymptotics(const ComplexMatrix& v, const DensityMatrix& rho0) {
    if (v.rows() != rho0.dim()) throw DimensionMismatch("asymptotics: dimensions differ");
    const SpectralData sd = spectral_decompose(v);

    AsymptoticReport rep;
    rep.lambda0 = sd.eigenvalues.front();
    rep.abs_lambda0 = std::abs(rep.lambda0);
    rep.gap = sd.dominant_gap;
    rep.optimal = std::abs(rep.abs_lambda0 - 1.0) <= kOptimalTol;
    rep.unique = sd.size() == 1 || rep.gap < 1.0 - kUniqueGapTol;

    for (Index k = 0; k < sd.size(); ++k) {
        const Complex lam = sd.eigenvalues[static_cast<std::size_t>(k)];
        if (k > 0 && (rep.unique || std::abs(lam) < rep.abs_lambda0 * (1.0 - kUniqueGapTol))) break;
        DominantPair d;
        d.lambda = lam;
        d.right = PureState(sd.u(k));
        d.left = sd.v(k);
        d.weight = d.left.dot(rho0.matrix() * d.left).real();
        rep.dominant.push_back(std::move(d));
    }
    rep.target = rep.dominant.front().right;
    rep.left0 = rep.dominant.front().left;
    rep.prefactor = rep.dominant.front().weight;
    return rep;
}

inline AsymptoticReport asymptotics(const CompiledCycle& v, const DensityMatrix& rho0) {
    return asymptotics(v.matrix, rho0);
}

/// Smallest N with 1 - F(N) <= eps against the dominant right eigenvector,
/// found by direct iteration. Expected to grow like log(eps) / log(gap).
inline long convergence_steps(const ComplexMatrix& v, const DensityMatrix& rho0, double eps, long max_steps = 1000000) {
    if (!(eps > 0.0)) throw PreconditionError("convergence_steps: eps must be > 0");
    const AsymptoticReport rep = asymptotics(v, rho0);
    if (!rep.unique) throw PreconditionError("convergence_steps: non-unique dominant eigenvalue");

    const PureState& target = rep.target;
    DensityMatrix rho = rho0;
    double yield = 1.0;
    for (long n = 0; n <= max_steps; ++n) {
        if (1.0 - rho.expectation(target) <= eps) return n;
        const ComplexMatrix next = v * rho.matrix() * v.adjoint();
        const double p = next.trace().real();
        yield *= p;
        if (!(p > 0.0) || !(yield >= kUnderflowYield)) throw YieldUnderflow(n);
        rho = DensityMatrix::normalized(next);
    }
    throw Error("convergence_steps: fidelity target not reached within " + std::to_string(max_steps) + " cycles");
}

inline long convergence_steps(const CompiledCycle& v, const DensityMatrix& rho0, double eps, long max_steps = 1000000) {
    return convergence_steps(v.matrix, rho0, eps, max_steps);
}

} // namespace zdistill
