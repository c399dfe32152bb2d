#pragma once

#include <vector>

#include "zdistill/error.hpp"

namespace zdistill {

/// Leading principal minors D_1..D_n of a symmetric tridiagonal matrix,
/// D_j = a_j D_{j-1} - b_j^2 D_{j-2} with D_0 = 1. `off[j]` couples rows
/// j-1 and j, so off[0] is ignored.
inline std::vector<double> tridiagonal_minors(const std::vector<double>& diag, const std::vector<double>& off) {
    if (off.size() != diag.size()) throw DimensionMismatch("tridiagonal_minors: size mismatch");
    std::vector<double> d(diag.size());
    double prev2 = 0.0, prev = 1.0;
    for (std::size_t j = 0; j < diag.size(); ++j) {
        const double cur = diag[j] * prev - (j > 0 ? off[j] * off[j] * prev2 : 0.0);
        d[j] = cur;
        prev2 = prev;
        prev = cur;
    }
    return d;
}

inline double tridiagonal_det(const std::vector<double>& diag, const std::vector<double>& off) {
    if (diag.empty()) return 1.0;
    return tridiagonal_minors(diag, off).back();
}

} // namespace zdistill
