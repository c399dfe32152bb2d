#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "zdistill/error.hpp"

namespace zdistill {

/// Root of f in [lo, hi] given f(lo) and f(hi) of opposite sign (or one of
/// them zero). Halves until the bracket is narrower than `xtol`.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol = 1e-14, int max_iter = 200) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) throw PreconditionError("bisect: endpoints do not bracket a root");
    for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Scans [a, b] in steps of `step`, bisects every sign change, and returns
/// the roots in ascending order.
template <class F>
std::vector<double> grid_roots(F&& f, double a, double b, double step, double xtol = 1e-14) {
    if (!(step > 0.0) || !(b > a)) throw PreconditionError("grid_roots: empty interval or step");
    std::vector<double> roots;
    double x0 = a;
    double f0 = f(x0);
    if (f0 == 0.0) roots.push_back(x0);
    while (x0 < b) {
        const double x1 = std::min(x0 + step, b);
        const double f1 = f(x1);
        if (f1 == 0.0) {
            roots.push_back(x1);
        } else if (f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
            roots.push_back(bisect(f, x0, x1, xtol));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

} // namespace zdistill
