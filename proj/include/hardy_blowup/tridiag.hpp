#pragma once

#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace hardy {

/// Thomas algorithm for lo[i] x[i-1] + di[i] x[i] + up[i] x[i+1] = rhs[i].
/// lo[0] and up[n-1] are ignored. No pivoting; deterministic for fixed input.
inline std::vector<double> solve_tridiagonal(const std::vector<double>& lo, const std::vector<double>& di,
                                             const std::vector<double>& up, std::vector<double> rhs) {
    const std::size_t n = di.size();
    if (lo.size() != n || up.size() != n || rhs.size() != n)
        throw DomainError("solve_tridiagonal: size mismatch");
    std::vector<double> c(n);
    double m = di[0];
    if (m == 0.0) throw NonConvergence("solve_tridiagonal: zero pivot");
    c[0] = up[0] / m;
    rhs[0] /= m;
    for (std::size_t i = 1; i < n; ++i) {
        m = di[i] - lo[i] * c[i - 1];
        if (m == 0.0) throw NonConvergence("solve_tridiagonal: zero pivot");
        c[i] = i + 1 < n ? up[i] / m : 0.0;
        rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return rhs;
}

} // namespace hardy
