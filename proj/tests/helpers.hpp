#pragma once

#include <complex>
#include <random>

#include "zdistill/linalg.hpp"

namespace testutil {

using zdistill::Complex;
using zdistill::ComplexMatrix;
using zdistill::ComplexVector;
using zdistill::Index;

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Index n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) m(i, j) = scale * Complex(g(rng), g(rng));
    return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Index n, double scale = 1.0) {
    const ComplexMatrix a = random_matrix(rng, n, scale);
    return 0.5 * (a + a.adjoint());
}

inline zdistill::DensityMatrix random_density(std::mt19937_64& rng, Index n) {
    const ComplexMatrix a = random_matrix(rng, n);
    return zdistill::DensityMatrix::normalized(a * a.adjoint());
}

/// Truncated exponential series, the independent reference for exp(-iHt).
inline ComplexMatrix taylor_expm(const ComplexMatrix& h, double t, int terms = 80) {
    const ComplexMatrix a = Complex(0.0, -t) * h;
    ComplexMatrix term = ComplexMatrix::Identity(h.rows(), h.cols());
    ComplexMatrix sum = term;
    for (int k = 1; k < terms; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    return sum;
}

} // namespace testutil
