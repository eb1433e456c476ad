#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace hardy::dopri {

/// Dormand-Prince 5(4) tableau.
struct Tableau {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b_hat
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct StepResult {
    State<N> y;
    State<N> f; // derivative at the new point (first stage of the next step)
    double err; // scaled RMS error, accept when <= 1
};

/// One trial step from (t, y) with derivative f0 = rhs(t, y).
template <std::size_t N, class Rhs>
StepResult<N> step(Rhs&& rhs, double t, const State<N>& y, const State<N>& f0, double h,
                   double rtol, double atol) {
    using T = Tableau;
    State<N> k2, k3, k4, k5, k6, k7, tmp, y5;
    auto comb = [&](auto&& fn) {
        for (std::size_t i = 0; i < N; ++i) tmp[i] = fn(i);
    };
    comb([&](std::size_t i) { return y[i] + h * T::a21 * f0[i]; });
    k2 = rhs(t + T::c2 * h, tmp);
    comb([&](std::size_t i) { return y[i] + h * (T::a31 * f0[i] + T::a32 * k2[i]); });
    k3 = rhs(t + T::c3 * h, tmp);
    comb([&](std::size_t i) { return y[i] + h * (T::a41 * f0[i] + T::a42 * k2[i] + T::a43 * k3[i]); });
    k4 = rhs(t + T::c4 * h, tmp);
    comb([&](std::size_t i) {
        return y[i] + h * (T::a51 * f0[i] + T::a52 * k2[i] + T::a53 * k3[i] + T::a54 * k4[i]);
    });
    k5 = rhs(t + T::c5 * h, tmp);
    comb([&](std::size_t i) {
        return y[i] + h * (T::a61 * f0[i] + T::a62 * k2[i] + T::a63 * k3[i] + T::a64 * k4[i] +
                           T::a65 * k5[i]);
    });
    k6 = rhs(t + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        y5[i] = y[i] + h * (T::b1 * f0[i] + T::b3 * k3[i] + T::b4 * k4[i] + T::b5 * k5[i] + T::b6 * k6[i]);
    k7 = rhs(t + h, y5);
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (T::e1 * f0[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] +
                              T::e6 * k6[i] + T::e7 * k7[i]);
        const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        acc += (e / sc) * (e / sc);
    }
    double err = std::sqrt(acc / N);
    if (!std::isfinite(err)) err = 1e300;
    return {y5, k7, err};
}

/// Step-size factor from the error estimate, clamped to [0.2, 5].
inline double step_factor(double err) {
    if (err == 0.0) return 5.0;
    return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

/// Cubic Hermite interpolant of one component on [t0, t0+h] at fraction th.
inline double hermite(double y0, double y1, double f0, double f1, double h, double th) {
    const double t2 = th * th, t3 = t2 * th;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + th) * h * f0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * f1;
}

inline double hermite_slope(double y0, double y1, double f0, double f1, double h, double th) {
    const double t2 = th * th;
    return ((6 * t2 - 6 * th) * y0 + (-6 * t2 + 6 * th) * y1) / h + (3 * t2 - 4 * th + 1) * f0 +
           (3 * t2 - 2 * th) * f1;
}

} // namespace hardy::dopri
