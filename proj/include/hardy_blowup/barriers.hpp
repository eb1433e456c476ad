#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "regime.hpp"

namespace hardy {

enum class BarrierFamily {
    PurePower,      // gamma d^beta
    PowerCorrected, // gamma d^beta (1 +- d^eps)
    LogPower,       // gamma d^{1/2} L^beta,                     L = log(1/d)
    LogCorrected,   // gamma d^{1/2} L^beta (1 +- L^{-eps}),     beta in {0, 1}
    KOPower,        // gamma d^beta with beta = (s-2)/(p-1)
    KORegularized,  // gamma d^{s/(p-1)} (d - d_eps)^{-2/(p-1)}
};

enum class Correction { None, Plus, Minus };
enum class Role { SubHarmonic, SuperHarmonic, SubSolution, SuperSolution };

/// Which characteristic root `beta` is, if any. Anchored specs get their
/// leading coefficient beta(1-beta)-mu evaluated as an exact zero.
enum class Anchor { Free, BetaMinus, BetaPlus };

/// Slab: d = delta, operator -u''. BallSmooth: d = delta(2-delta)/2 = (1-r^2)/2
/// in the unit ball of dimension `dim`, operator -u'' + (N-1)/(1-delta) u'.
enum class DistanceModel { Slab, BallSmooth };

inline std::string_view to_string(BarrierFamily f) {
    switch (f) {
    case BarrierFamily::PurePower: return "PurePower";
    case BarrierFamily::PowerCorrected: return "PowerCorrected";
    case BarrierFamily::LogPower: return "LogPower";
    case BarrierFamily::LogCorrected: return "LogCorrected";
    case BarrierFamily::KOPower: return "KOPower";
    case BarrierFamily::KORegularized: return "KORegularized";
    }
    return "?";
}

inline std::string_view to_string(Role r) {
    switch (r) {
    case Role::SubHarmonic: return "SubHarmonic";
    case Role::SuperHarmonic: return "SuperHarmonic";
    case Role::SubSolution: return "SubSolution";
    case Role::SuperSolution: return "SuperSolution";
    }
    return "?";
}

struct BarrierSpec {
    BarrierFamily family = BarrierFamily::PurePower;
    double beta = 0.0;
    /// correction exponent; for KORegularized the pole position in delta
    double epsilon_param = 0.0;
    double gamma = 1.0;
    Correction sign = Correction::None;
    Role claimed_role = Role::SuperHarmonic;
    Anchor anchor = Anchor::Free;
    /// KORegularized exponents a = s/(p-1), c = 2/(p-1)
    double ko_a = 0.0;
    double ko_c = 0.0;
    DistanceModel distance = DistanceModel::Slab;
    int dim = 1;

    bool is_ko() const {
        return family == BarrierFamily::KOPower || family == BarrierFamily::KORegularized;
    }
    bool has_log() const {
        return family == BarrierFamily::LogPower || family == BarrierFamily::LogCorrected;
    }
};

struct DistanceWindow {
    double delta_min = 1e-6;
    double delta_max = 0.05;
    int n_samples = 1000;
};

/// Geometric sample points delta_min .. delta_max inclusive.
inline std::vector<double> sample_points(const DistanceWindow& w) {
    if (!(w.delta_min > 0.0 && w.delta_min < w.delta_max && w.n_samples >= 2))
        throw DomainError("DistanceWindow: need 0 < delta_min < delta_max and n >= 2");
    std::vector<double> out(static_cast<std::size_t>(w.n_samples));
    const double la = std::log(w.delta_min), lb = std::log(w.delta_max);
    for (int i = 0; i < w.n_samples; ++i)
        out[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (w.n_samples - 1));
    out.front() = w.delta_min;
    out.back() = w.delta_max;
    return out;
}

namespace detail {

/// coef * d^{beta+shift} * L^{log_power}
struct Term {
    double coef;
    double shift;
    double log_power;
};

inline std::vector<Term> terms_of(const BarrierSpec& b) {
    const double g = b.gamma;
    const double sg = b.sign == Correction::Plus ? 1.0 : (b.sign == Correction::Minus ? -1.0 : 0.0);
    switch (b.family) {
    case BarrierFamily::PurePower:
    case BarrierFamily::KOPower:
        return {{g, 0.0, 0.0}};
    case BarrierFamily::PowerCorrected:
        return {{g, 0.0, 0.0}, {sg * g, b.epsilon_param, 0.0}};
    case BarrierFamily::LogPower:
        return {{g, 0.0, b.beta}};
    case BarrierFamily::LogCorrected:
        return {{g, 0.0, b.beta}, {sg * g, 0.0, b.beta - b.epsilon_param}};
    case BarrierFamily::KORegularized:
        break;
    }
    throw DomainError("terms_of: KORegularized has no term expansion");
}

/// Base exponent of the term expansion (1/2 for the log families).
inline double base_exponent(const BarrierSpec& b) { return b.has_log() ? 0.5 : b.beta; }

inline double ball_distance(double delta) { return delta * (2.0 - delta) / 2.0; }

inline void check_delta(const BarrierSpec& b, double delta) {
    if (!(delta > 0.0)) throw DomainError("barrier: delta must be positive");
    if (b.has_log() && !(delta < 1.0)) throw DomainError("barrier: log families need delta < 1");
    if (b.distance == DistanceModel::BallSmooth && !(delta <= 1.0))
        throw DomainError("barrier: ball distance needs delta <= 1");
    if (b.family == BarrierFamily::KORegularized && !(delta > b.epsilon_param))
        throw DomainError("barrier: KORegularized needs delta above the pole");
}

/// Value and first two derivatives in the distance variable d.
struct Jet {
    double u, du, ddu;
};

inline Jet ko_jet_in_d(const BarrierSpec& b, double d, double d_pole) {
    const double x = d - d_pole;
    const double a = b.ko_a, c = b.ko_c;
    const double u = b.gamma * std::pow(d, a) * std::pow(x, -c);
    const double g = a / d - c / x;
    return {u, u * g, u * (g * g - a / (d * d) + c / (x * x))};
}

inline Jet term_jet(const BarrierSpec& b, double d) {
    const double beta = base_exponent(b);
    const double L = -std::log(d);
    Jet j{0.0, 0.0, 0.0};
    for (const Term& t : terms_of(b)) {
        const double a = beta + t.shift, k = t.log_power;
        const double pa = std::pow(d, a);
        const double Lk = k == 0.0 ? 1.0 : std::pow(L, k);
        const double Lk1 = k == 0.0 ? 0.0 : k * std::pow(L, k - 1.0);
        const double Lk2 = (k == 0.0 || k == 1.0) ? 0.0 : k * (k - 1.0) * std::pow(L, k - 2.0);
        j.u += t.coef * pa * Lk;
        j.du += t.coef * pa / d * (a * Lk - Lk1);
        j.ddu += t.coef * pa / (d * d) * (a * (a - 1.0) * Lk - (2.0 * a - 1.0) * Lk1 + Lk2);
    }
    return j;
}

} // namespace detail

/// Value and derivatives in delta, including the chain rule through the
/// smooth ball distance.
inline detail::Jet barrier_jet(const BarrierSpec& b, double delta) {
    detail::check_delta(b, delta);
    const bool ball = b.distance == DistanceModel::BallSmooth;
    const double d = ball ? detail::ball_distance(delta) : delta;
    detail::Jet j;
    if (b.family == BarrierFamily::KORegularized) {
        const double dp = ball ? detail::ball_distance(b.epsilon_param) : b.epsilon_param;
        j = detail::ko_jet_in_d(b, d, dp);
    } else {
        j = detail::term_jet(b, d);
    }
    if (!ball) return j;
    const double d1 = 1.0 - delta;
    return {j.u, j.du * d1, j.ddu * d1 * d1 - j.du};
}

inline double eval_barrier(const BarrierSpec& b, double delta) {
    detail::check_delta(b, delta);
    if (b.family == BarrierFamily::KORegularized || b.distance == DistanceModel::BallSmooth)
        return barrier_jet(b, delta).u;
    const double beta = detail::base_exponent(b);
    const double L = b.has_log() ? -std::log(delta) : 0.0;
    double u = 0.0;
    for (const auto& t : detail::terms_of(b))
        u += t.coef * std::pow(delta, beta + t.shift) * (t.log_power == 0.0 ? 1.0 : std::pow(L, t.log_power));
    return u;
}

/// Radial drift (N-1)/(1-delta) u' of the ball operator, finite at the centre.
inline double ball_drift(const BarrierSpec& b, double delta) {
    if (b.distance != DistanceModel::BallSmooth) return 0.0;
    // u' = U'(d)(1-delta), so the quotient is (N-1) U'(d) even at delta = 1.
    const double d = detail::ball_distance(delta);
    detail::Jet j;
    if (b.family == BarrierFamily::KORegularized)
        j = detail::ko_jet_in_d(b, d, detail::ball_distance(b.epsilon_param));
    else
        j = detail::term_jet(b, d);
    return (b.dim - 1) * j.du;
}

namespace detail {

/// beta(1-beta) - mu with exact cancellation for anchored exponents.
inline double leading_coefficient(const BarrierSpec& b, const ProblemParams& pp, double shift) {
    const double a = base_exponent(b) + shift;
    if (b.anchor != Anchor::Free) {
        if (auto r = characteristic_roots(pp.mu)) {
            const double root = b.anchor == Anchor::BetaMinus ? r->beta_minus : r->beta_plus;
            if (std::abs(base_exponent(b) - root) <= 1e-14)
                return -shift * (shift + 2.0 * root - 1.0);
        }
    }
    return a * (1.0 - a) - pp.mu;
}

} // namespace detail

/// -h'' - (mu/delta^2) h, plus the radial drift for ball-distance specs.
inline double linear_residual(const BarrierSpec& b, const ProblemParams& pp, double delta) {
    detail::check_delta(b, delta);
    if (b.family == BarrierFamily::KORegularized || b.distance == DistanceModel::BallSmooth) {
        const auto j = barrier_jet(b, delta);
        return -j.ddu + ball_drift(b, delta) - pp.mu * j.u / (delta * delta);
    }
    const double beta = detail::base_exponent(b);
    const double L = b.has_log() ? -std::log(delta) : 0.0;
    double res = 0.0;
    for (const auto& t : detail::terms_of(b)) {
        const double a = beta + t.shift, k = t.log_power;
        double bracket = detail::leading_coefficient(b, pp, t.shift) * (k == 0.0 ? 1.0 : std::pow(L, k));
        if (k != 0.0) {
            bracket += k * (2.0 * a - 1.0) * std::pow(L, k - 1.0);
            if (k != 1.0) bracket += k * (1.0 - k) * std::pow(L, k - 2.0);
        }
        res += t.coef * std::pow(delta, a - 2.0) * bracket;
    }
    return res;
}

/// -u'' - (mu/delta^2) u + u^p/delta^s at one point.
inline double nonlinear_residual(double u_value, double u_second_deriv, const ProblemParams& pp,
                                 double delta) {
    if (u_value < 0.0) throw DomainError("nonlinear_residual: u must be nonnegative");
    if (!(delta > 0.0)) throw DomainError("nonlinear_residual: delta must be positive");
    return -u_second_deriv - pp.mu * u_value / (delta * delta) +
           std::pow(u_value, pp.p) / std::pow(delta, pp.s);
}

/// Full nonlinear residual of a barrier, geometry included.
inline double solution_residual(const BarrierSpec& b, const ProblemParams& pp, double delta) {
    const auto j = barrier_jet(b, delta);
    return nonlinear_residual(j.u, j.ddu, pp, delta) + ball_drift(b, delta);
}

/// Sum of magnitudes of the residual's terms; the yardstick for sign tests.
inline double residual_scale(const BarrierSpec& b, const ProblemParams& pp, double delta,
                             bool with_nonlinear) {
    const auto j = barrier_jet(b, delta);
    double sc = std::abs(j.ddu) + std::abs(ball_drift(b, delta)) +
                std::abs(pp.mu * j.u / (delta * delta));
    if (with_nonlinear) sc += std::pow(std::abs(j.u), pp.p) / std::pow(delta, pp.s);
    return sc;
}

/// Centered finite-difference version of linear_residual, for cross-checks.
/// Differentiates the closed-form first derivative, so it checks both h' and h''.
inline double linear_residual_fd(const BarrierSpec& b, const ProblemParams& pp, double delta,
                                 double rel_step = 1e-6) {
    const double h = rel_step * delta;
    const auto jp = barrier_jet(b, delta + h), jm = barrier_jet(b, delta - h);
    const auto j = barrier_jet(b, delta);
    const double ddu = (jp.du - jm.du) / (2.0 * h);
    return -ddu + ball_drift(b, delta) - pp.mu * j.u / (delta * delta);
}

inline double first_derivative_fd(const BarrierSpec& b, double delta, double rel_step = 1e-6) {
    const double h = rel_step * delta;
    return (eval_barrier(b, delta + h) - eval_barrier(b, delta - h)) / (2.0 * h);
}

namespace detail {

inline bool sign_ok(const BarrierSpec& b, const ProblemParams& pp, double delta) {
    const bool solution = b.claimed_role == Role::SubSolution || b.claimed_role == Role::SuperSolution;
    const double u = eval_barrier(b, delta);
    if (!(u > 0.0)) return false;
    const double res = solution ? solution_residual(b, pp, delta) : linear_residual(b, pp, delta);
    const double tol = 1e-12 * residual_scale(b, pp, delta, solution);
    const bool super = b.claimed_role == Role::SuperHarmonic || b.claimed_role == Role::SuperSolution;
    return super ? res >= -tol : res <= tol;
}

} // namespace detail

/// Largest rho0 <= window.delta_max up to which the claimed sign holds at every
/// sample (and the barrier stays positive). 0 when the first sample fails.
inline double validity_radius(const BarrierSpec& b, const ProblemParams& pp, const DistanceWindow& w,
                              std::string* diagnostic = nullptr) {
    const auto pts = sample_points(w);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool ok;
        try {
            ok = detail::sign_ok(b, pp, pts[i]);
        } catch (const DomainError&) {
            ok = false;
        }
        if (!ok) {
            if (diagnostic) {
                *diagnostic = i == 0 ? "claimed " + std::string(to_string(b.claimed_role)) +
                                           " sign fails at delta_min"
                                     : "sign change before delta_max";
            }
            return i == 0 ? 0.0 : pts[i];
        }
    }
    if (diagnostic) diagnostic->clear();
    return w.delta_max;
}

// ---------------------------------------------------------------------------
// Named barriers

inline BarrierSpec pure_power(double beta, Role role, Anchor anchor = Anchor::Free) {
    BarrierSpec b;
    b.family = BarrierFamily::PurePower;
    b.beta = beta;
    b.claimed_role = role;
    b.anchor = anchor;
    return b;
}

inline BarrierSpec power_corrected(double beta, double eps, Correction sign, Role role,
                                   Anchor anchor = Anchor::Free) {
    if (!(eps > 0.0)) throw DomainError("power_corrected: eps must be positive");
    BarrierSpec b = pure_power(beta, role, anchor);
    b.family = BarrierFamily::PowerCorrected;
    b.epsilon_param = eps;
    b.sign = sign;
    return b;
}

inline BarrierSpec log_power(double beta, Role role) {
    BarrierSpec b;
    b.family = BarrierFamily::LogPower;
    b.beta = beta;
    b.claimed_role = role;
    b.anchor = Anchor::BetaMinus;
    return b;
}

/// d^{1/2} L^beta (1 +- L^{-eps}); beta = 0 gives the small pair, beta = 1 the large.
inline BarrierSpec log_corrected(double beta, double eps, Correction sign, Role role) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("log_corrected: eps must lie in (0, 1)");
    BarrierSpec b = log_power(beta, role);
    b.family = BarrierFamily::LogCorrected;
    b.epsilon_param = eps;
    b.sign = sign;
    return b;
}

/// min(1, sqrt(1-4mu)): the admissible correction exponents are (0, eps*).
inline double epsilon_star(double mu) {
    if (!(mu <= 0.25)) throw DomainError("epsilon_star: needs mu <= 1/4");
    return std::min(1.0, std::sqrt(1.0 - 4.0 * mu));
}

/// 1/2 where admissible, otherwise half of eps*.
inline double default_barrier_epsilon(double mu) {
    if (mu == 0.25) return 0.5;
    return std::min(0.5, epsilon_star(mu) / 2.0);
}

struct NamedBarrier {
    std::string name;
    BarrierSpec spec;
};

/// The four local barriers for the given mu: the power family when mu < 1/4,
/// the log family when mu = 1/4. Order: h_bar, H_bar, h_under, H_under.
inline std::vector<NamedBarrier> local_barriers(double mu, double eps) {
    auto r = characteristic_roots(mu);
    if (!r) throw DomainError("local_barriers: no barriers for mu > 1/4");
    if (!r->degenerate) {
        if (!(eps > 0.0 && eps < epsilon_star(mu)))
            throw DomainError("local_barriers: eps outside (0, min(1, sqrt(1-4mu)))");
        const double bp = r->beta_plus, bm = r->beta_minus;
        return {
            {"h_bar", power_corrected(bp, eps, Correction::Minus, Role::SuperHarmonic, Anchor::BetaPlus)},
            {"H_bar", power_corrected(bm, eps, Correction::Plus, Role::SuperHarmonic, Anchor::BetaMinus)},
            {"h_under", power_corrected(bp, eps, Correction::Plus, Role::SubHarmonic, Anchor::BetaPlus)},
            {"H_under", power_corrected(bm, eps, Correction::Minus, Role::SubHarmonic, Anchor::BetaMinus)},
        };
    }
    return {
        {"h_bar", log_corrected(0.0, eps, Correction::Minus, Role::SuperHarmonic)},
        {"H_bar", log_corrected(1.0, eps, Correction::Plus, Role::SuperHarmonic)},
        {"h_under", log_corrected(0.0, eps, Correction::Plus, Role::SubHarmonic)},
        {"H_under", log_corrected(1.0, eps, Correction::Minus, Role::SubHarmonic)},
    };
}

/// Finds the barrier named `name` among local_barriers(mu, eps).
inline BarrierSpec local_barrier(std::string_view name, double mu, double eps) {
    for (auto& nb : local_barriers(mu, eps))
        if (nb.name == name) return nb.spec;
    throw DomainError("unknown barrier name: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Keller-Osserman super-solutions

inline BarrierSpec ko_profile(const ProblemParams& pp, double gamma, double eps,
                              DistanceModel dist = DistanceModel::Slab, int dim = 1) {
    BarrierSpec b;
    b.family = BarrierFamily::KORegularized;
    b.beta = pp.ko_exponent();
    b.gamma = gamma;
    b.epsilon_param = eps;
    b.ko_a = pp.s / (pp.p - 1.0);
    b.ko_c = 2.0 / (pp.p - 1.0);
    b.claimed_role = Role::SuperSolution;
    b.distance = dist;
    b.dim = dim;
    return b;
}

/// Points where the KO super-solution property is certified: geometric in the
/// gap to the pole, from 1e-9 up to the far end of the domain.
inline std::vector<double> ko_check_points(double eps, int n = 2000) {
    const double far = 1.0 - eps;
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(n));
    const double la = std::log(1e-9), lb = std::log(far);
    for (int i = 0; i < n; ++i) {
        const double x = std::exp(la + (lb - la) * i / (n - 1));
        pts.push_back(i == n - 1 ? 1.0 : eps + x);
    }
    return pts;
}

/// True when the KO profile is a super-solution at every check point, up to
/// relative rounding.
inline bool ko_is_supersolution(const BarrierSpec& b, const ProblemParams& pp,
                                const std::vector<double>& pts) {
    for (double d : pts) {
        const double res = solution_residual(b, pp, d);
        if (!std::isfinite(res)) continue; // beyond double range next to the pole
        if (res < -1e-12 * residual_scale(b, pp, d, true)) return false;
    }
    return true;
}

/// Smallest gamma of the form gamma_0 * 2^k (gamma_0 = max(1, b(b-1))^{1/(p-1)})
/// making the KO profile with pole at eps a super-solution on {delta > eps}.
inline BarrierSpec ko_supersolution(const ProblemParams& pp, double eps,
                                    DistanceModel dist = DistanceModel::Slab, int dim = 1) {
    if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("ko_supersolution: eps must lie in [0, 1)");
    const double b = pp.ko_exponent();
    const double g0 = std::pow(std::max(1.0, b * (b - 1.0)), 1.0 / (pp.p - 1.0));
    const auto pts = ko_check_points(eps);
    double g = g0;
    for (int k = 0; k <= 20; ++k, g *= 2.0) {
        auto spec = ko_profile(pp, g, eps, dist, dim);
        if (ko_is_supersolution(spec, pp, pts)) return spec;
    }
    throw NonConvergence("ko_supersolution: gamma exceeded 2^20 gamma_0");
}

} // namespace hardy
