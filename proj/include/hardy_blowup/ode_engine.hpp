#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "barriers.hpp"
#include "dopri.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "regime.hpp"

namespace hardy {

/// -v'' - (2 eta'/eta - H) v' + (eta^{p-1}/r^s) v^p = 0 on (R, rho),
/// v(rho) = 0, v'(rho) = -kappa.
struct OdeProblem {
    ProblemParams params;
    BarrierSpec eta;
    double h_bar = 0.0;
    double rho = 0.5;
    double kappa = 1.0;
};

/// Right endpoint used when none is given. In the degenerate case the
/// log barrier needs rho < 1/e; elsewhere rho shrinks as beta_- grows so that
/// subcritical data never blows up spuriously before the asymptotic regime.
inline double default_rho(double mu) {
    auto r = characteristic_roots(mu);
    if (!r) throw RegimeError("no barrier ODE for mu > 1/4");
    if (r->degenerate) return 0.2;
    return std::min(0.9, (1.0 - 2.0 * r->beta_minus) / 2.0);
}

/// Correction exponent of eta when none is given.
inline double default_eta_epsilon(double mu) {
    if (mu == 0.25) return 0.9;
    return default_barrier_epsilon(mu);
}

/// eta = r^{beta_-}(1 + r^eps) when mu < 1/4, r^{1/2}(1 - log(1/r)^{-eps}) when mu = 1/4.
inline BarrierSpec default_eta(double mu, double eps) {
    auto r = characteristic_roots(mu);
    if (!r) throw RegimeError("no barrier ODE for mu > 1/4");
    if (r->degenerate) return log_corrected(0.0, eps, Correction::Minus, Role::SuperHarmonic);
    return power_corrected(r->beta_minus, eps, Correction::Plus, Role::SuperHarmonic, Anchor::BetaMinus);
}

inline OdeProblem make_ode_problem(const ProblemParams& pp, double kappa,
                                   Geometry geom = Geometry::slab(),
                                   std::optional<double> eta_eps = std::nullopt,
                                   std::optional<double> rho = std::nullopt) {
    OdeProblem pb;
    pb.params = pp;
    pb.kappa = kappa;
    pb.rho = rho.value_or(default_rho(pp.mu));
    pb.eta = default_eta(pp.mu, eta_eps.value_or(default_eta_epsilon(pp.mu)));
    pb.h_bar = geom.is_ball() ? (geom.dim - 1) / (1.0 - pb.rho) : 0.0;
    return pb;
}

enum class Terminal { ReachedRMin, BlowUp, StepFailure };

inline std::string_view to_string(Terminal t) {
    switch (t) {
    case Terminal::ReachedRMin: return "ReachedRMin";
    case Terminal::BlowUp: return "BlowUp";
    case Terminal::StepFailure: return "StepFailure";
    }
    return "?";
}

/// Stored as log r and r*v' so that radii far below the double range stay usable.
struct TrajectorySample {
    double log_r;
    double v;
    double r_v_dot;

    double r() const { return std::exp(log_r); }
    double v_dot() const { return r_v_dot / r(); }
};

struct Trajectory {
    OdeProblem problem;
    std::vector<TrajectorySample> samples; // decreasing in r, first at rho
    Terminal terminal = Terminal::ReachedRMin;
    /// blow-up radius extrapolated from the threshold crossings
    double R_kappa = 0.0;
    double log_R = -std::numeric_limits<double>::infinity();
    /// absolute error estimate of log_R (equivalently, relative error of R)
    double error_estimate = 0.0;
    /// radius where v crossed v_max
    double R_termination = 0.0;
    double log_R_termination = -std::numeric_limits<double>::infinity();
    double r_min_target = 0.0;
    double log_r_min_target = 0.0;
    std::vector<TrajectorySample> checkpoints;
    std::vector<double> levels;        // thresholds whose crossings were recorded
    std::vector<double> level_log_r;   // log r at each crossing
    /// ratio of successive crossing gaps; near 1 for power growth, small for blow-up
    double crossing_ratio = 1.0;
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::string message;

    /// v > 0 and v' < 0 at every sample strictly inside.
    bool monotone() const {
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (!(samples[i].v > 0.0 && samples[i].r_v_dot < 0.0)) return false;
        return true;
    }
    bool blew_up() const { return terminal == Terminal::BlowUp; }

    /// v at log r by linear interpolation in log r, or nullopt outside the samples.
    std::optional<double> v_at_log_r(double lr) const;
};

inline std::optional<double> Trajectory::v_at_log_r(double lr) const {
    if (samples.empty()) return std::nullopt;
    if (lr > samples.front().log_r || lr < samples.back().log_r) return std::nullopt;
    auto it = std::lower_bound(samples.begin(), samples.end(), lr,
                               [](const TrajectorySample& s, double x) { return s.log_r > x; });
    if (it == samples.begin()) return it->v;
    if (it == samples.end()) return samples.back().v;
    const auto& b = *it;
    const auto& a = *(it - 1);
    if (a.log_r == b.log_r) return b.v;
    const double t = (lr - a.log_r) / (b.log_r - a.log_r);
    return a.v + t * (b.v - a.v);
}

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    /// minimum spacing in log r between stored samples; 0 keeps every step
    double sample_spacing = 0.0;
    /// radii where a sample is forced (steps land on them exactly)
    std::vector<double> checkpoints_r;
    /// overrides log(r_min) so targets below the double range can be used
    std::optional<double> log_r_min;
    /// extra thresholds, as fractions of v_max, whose crossings feed the
    /// blow-up extrapolation
    std::vector<double> level_fractions = {1e-4, 1e-2};
    std::size_t max_steps = 50'000'000;
};

namespace detail {

/// eta in the form r^beta * S(r) with S a sum of r^shift L^k terms.
class EtaCoefficients {
public:
    EtaCoefficients(const OdeProblem& pb)
        : beta_(base_exponent(pb.eta)), terms_(terms_of(pb.eta)), p_(pb.params.p),
          s_(pb.params.s), h_bar_(pb.h_bar) {
        if (pb.eta.is_ko()) throw DomainError("eta must be one of the local super-harmonics");
    }

    struct Values {
        double ratio;   // r eta'/eta
        double forcing; // eta^{p-1} r^{2-s}
        double S;
    };

    Values at(double log_r) const {
        const double L = -log_r;
        double S = 0.0, D = 0.0;
        for (const auto& t : terms_) {
            const double e = t.shift == 0.0 ? 1.0 : std::exp(t.shift * log_r);
            const double k = t.log_power;
            const double Lk = k == 0.0 ? 1.0 : std::pow(L, k);
            const double Lk1 = k == 0.0 ? 0.0 : k * std::pow(L, k - 1.0);
            S += t.coef * e * Lk;
            D += t.coef * e * (t.shift * Lk - Lk1);
        }
        return {beta_ + D / S, std::exp((beta_ * (p_ - 1.0) + 2.0 - s_) * log_r) * std::pow(S, p_ - 1.0), S};
    }

    double beta() const { return beta_; }
    double h_bar() const { return h_bar_; }

private:
    double beta_;
    std::vector<Term> terms_;
    double p_, s_, h_bar_;
};

struct BlowupExtrapolation {
    double tau_R;
    double error;
    double ratio; // (t3-t2)/(t2-t1); near 1 for power growth, small for blow-up
};

/// Near blow-up v ~ A (tau_R - tau)^{-2/(p-1)}, so tau(V) = tau_R - C V^{-q}
/// with q = (p-1)/2. Each consecutive pair of crossings gives an estimate of
/// tau_R; the last two estimates give the error.
inline BlowupExtrapolation extrapolate_blowup(const std::vector<double>& levels,
                                              const std::vector<double>& taus, double p) {
    const std::size_t n = taus.size();
    if (n < 2 || levels.size() != n) throw DomainError("extrapolate_blowup: need two crossings");
    const double q = (p - 1.0) / 2.0;
    auto pair_estimate = [&](std::size_t i) {
        const double a = std::pow(levels[i], -q), b = std::pow(levels[i + 1], -q);
        const double C = (taus[i + 1] - taus[i]) / (a - b);
        return std::pair{taus[i + 1] + C * b, C * b};
    };
    const auto last = pair_estimate(n - 2);
    BlowupExtrapolation out{last.first, std::abs(last.second), 1.0};
    if (n >= 3) {
        const auto prev = pair_estimate(n - 3);
        out.error = std::abs(last.first - prev.first);
        const double d1 = taus[n - 2] - taus[n - 3], d2 = taus[n - 1] - taus[n - 2];
        out.ratio = d1 > 0.0 ? d2 / d1 : 1.0;
    }
    return out;
}

inline void validate(const OdeProblem& pb) {
    if (!(pb.rho > 0.0 && pb.rho < 1.0)) throw DomainError("OdeProblem: rho must lie in (0, 1)");
    if (!(pb.kappa >= 0.0) || !std::isfinite(pb.kappa)) throw DomainError("OdeProblem: kappa must be >= 0");
    if (!(pb.h_bar >= 0.0)) throw DomainError("OdeProblem: h_bar must be >= 0");
    if (pb.eta.claimed_role != Role::SuperHarmonic)
        throw DomainError("OdeProblem: eta must be a super-harmonic");
    if (!(eval_barrier(pb.eta, pb.rho) > 0.0)) throw DomainError("OdeProblem: eta must be positive at rho");
}

} // namespace detail

/// Integrates the barrier ODE leftward from rho in tau = log(rho/r), with
/// w = dv/dtau = -r v'. Terminates with BlowUp at the first crossing of v_max.
inline Trajectory integrate_left(const OdeProblem& pb, double r_min, double v_max,
                                 const OdeOptions& opt = {}) {
    detail::validate(pb);
    if (!(v_max > 0.0)) throw DomainError("integrate_left: v_max must be positive");
    const double log_rho = std::log(pb.rho);
    const double log_r_min = opt.log_r_min.value_or(r_min > 0.0 ? std::log(r_min) : -INFINITY);
    if (!(log_r_min < log_rho) || !std::isfinite(log_r_min))
        throw DomainError("integrate_left: need 0 < r_min < rho");

    const detail::EtaCoefficients eta(pb);
    const double p = pb.params.p;
    auto rhs = [&](double base, double tau, const dopri::State<2>& y) -> dopri::State<2> {
        const double lr = (log_rho - base) - tau;
        const auto c = eta.at(lr);
        const double drift = 2.0 * c.ratio - eta.h_bar() * std::exp(lr);
        const double vp = y[0] > 0.0 ? std::pow(y[0], p) : 0.0;
        return {y[1], -y[1] + drift * y[1] + c.forcing * vp};
    };

    Trajectory tr;
    tr.problem = pb;
    tr.r_min_target = std::exp(log_r_min);
    tr.log_r_min_target = log_r_min;
    for (double f : opt.level_fractions)
        if (f > 0.0 && f < 1.0) tr.levels.push_back(f * v_max);
    std::sort(tr.levels.begin(), tr.levels.end());
    tr.levels.push_back(v_max);

    std::vector<double> checkpoints;
    for (double rc : opt.checkpoints_r)
        if (rc > 0.0 && rc < pb.rho) checkpoints.push_back(log_rho - std::log(rc));
    std::sort(checkpoints.begin(), checkpoints.end());
    std::size_t next_cp = 0;

    // tau is kept relative to a moving origin `base` so that steps near a
    // blow-up at tau ~ 1e6 are not lost to rounding in tau itself
    const double tau_end = log_rho - log_r_min;
    double base = 0.0, tau = 0.0;
    dopri::State<2> y{0.0, pb.rho * pb.kappa};
    auto f = rhs(base, tau, y);
    double h = std::min(1e-3, tau_end);
    double last_sample_tau = 0.0; // global
    std::vector<std::pair<double, double>> level_tau; // (base, local)
    tr.samples.push_back({log_rho, 0.0, -y[1]});
    bool done = false;

    while (!done && base + tau < tau_end) {
        if (++tr.steps > opt.max_steps) {
            tr.terminal = Terminal::StepFailure;
            tr.message = "step budget exhausted";
            break;
        }
        double target = tau_end - base;
        while (next_cp < checkpoints.size() && checkpoints[next_cp] - base <= tau) ++next_cp;
        if (next_cp < checkpoints.size()) target = std::min(target, checkpoints[next_cp] - base);
        bool lands = false;
        if (tau + h >= target) {
            h = target - tau;
            lands = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(tau))) {
            tr.terminal = Terminal::StepFailure;
            tr.message = "step size underflow";
            break;
        }
        auto st = dopri::step<2>([&](double t, const dopri::State<2>& yy) { return rhs(base, t, yy); },
                                 tau, y, f, h, opt.rtol, opt.atol);
        if (!(st.err <= 1.0) || !std::isfinite(st.y[0]) || !std::isfinite(st.y[1])) {
            h *= std::isfinite(st.err) ? std::min(1.0, dopri::step_factor(st.err)) : 0.2;
            ++tr.rejected;
            continue;
        }
        const double tau_new = lands ? target : tau + h;
        // threshold crossings inside this step
        while (level_tau.size() < tr.levels.size() && st.y[0] >= tr.levels[level_tau.size()]) {
            const double L = tr.levels[level_tau.size()];
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (dopri::hermite(y[0], st.y[0], f[0], st.f[0], h, mid) < L) lo = mid;
                else hi = mid;
            }
            const double tc = tau + hi * h;
            level_tau.push_back({base, tc});
            tr.level_log_r.push_back((log_rho - base) - tc);
            if (level_tau.size() == tr.levels.size()) {
                const double w = dopri::hermite(y[1], st.y[1], f[1], st.f[1], h, hi);
                tr.samples.push_back({(log_rho - base) - tc, L, -w});
                tr.terminal = Terminal::BlowUp;
                tr.log_R_termination = (log_rho - base) - tc;
                tr.R_termination = std::exp(tr.log_R_termination);
                done = true;
                break;
            }
        }
        if (done) break;
        tau = tau_new;
        y = st.y;
        f = st.f;
        const double lr_now = (log_rho - base) - tau;
        if (lands && next_cp < checkpoints.size() && base + tau >= checkpoints[next_cp] - 1e-12 * (1.0 + base)) {
            tr.checkpoints.push_back({lr_now, y[0], -y[1]});
            ++next_cp;
        }
        if (base + tau - last_sample_tau >= opt.sample_spacing || (lands && target == tau_end - base)) {
            tr.samples.push_back({lr_now, y[0], -y[1]});
            last_sample_tau = base + tau;
        }
        if (lands && target == tau_end - base) break;
        h *= dopri::step_factor(st.err);
        if (tau > 16.0) {
            base += tau;
            tau = 0.0;
        }
    }
    if (tr.terminal == Terminal::BlowUp) {
        const double ref = level_tau.front().first;
        std::vector<double> rel;
        for (auto [b, t] : level_tau) rel.push_back((b - ref) + t);
        auto ex = detail::extrapolate_blowup(tr.levels, rel, p);
        tr.log_R = (log_rho - ref) - ex.tau_R;
        tr.R_kappa = std::exp(tr.log_R);
        tr.error_estimate = ex.error;
        tr.crossing_ratio = ex.ratio;
    } else if (tr.terminal == Terminal::ReachedRMin && tr.samples.back().log_r != (log_rho - base) - tau) {
        tr.samples.push_back({(log_rho - base) - tau, y[0], -y[1]});
    }
    return tr;
}

struct BlowupRadius {
    double R;
    double log_R;
    /// error estimate of log R (relative error of R)
    double error_estimate;
    /// absolute error estimate of R
    double abs_error;
    std::vector<double> termination_log_r;
};

/// Extrapolated blow-up radius from the crossings of an increasing sequence
/// of thresholds. Throws NotBlowingUp if v never reaches the thresholds, or
/// reaches them at a rate that is not a finite-radius blow-up.
inline BlowupRadius detect_blowup_radius(const OdeProblem& pb, const std::vector<double>& v_max_sequence,
                                         double r_min = 1e-6, OdeOptions opt = {}) {
    if (v_max_sequence.size() < 2) throw DomainError("detect_blowup_radius: need at least two thresholds");
    for (std::size_t i = 1; i < v_max_sequence.size(); ++i)
        if (!(v_max_sequence[i] > v_max_sequence[i - 1]))
            throw DomainError("detect_blowup_radius: thresholds must increase");
    const double vmax = v_max_sequence.back();
    opt.level_fractions.clear();
    for (std::size_t i = 0; i + 1 < v_max_sequence.size(); ++i)
        opt.level_fractions.push_back(v_max_sequence[i] / vmax);
    opt.sample_spacing = std::max(opt.sample_spacing, 1e-2);
    auto tr = integrate_left(pb, r_min, vmax, opt);
    if (tr.terminal == Terminal::StepFailure) throw StepFailure(tr.message);
    if (tr.terminal != Terminal::BlowUp)
        throw NotBlowingUp("v stays below the thresholds down to r_min");
    if (!(tr.crossing_ratio < 0.75))
        throw NotBlowingUp("threshold crossings are not converging (power-law growth)");
    BlowupRadius out;
    out.log_R = tr.log_R;
    out.R = tr.R_kappa;
    out.error_estimate = tr.error_estimate;
    out.abs_error = out.R * std::expm1(tr.error_estimate);
    out.termination_log_r = tr.level_log_r;
    return out;
}

struct SweepEntry {
    double kappa;
    Terminal terminal;
    double R_kappa;
    double log_R;
    /// sup of v on [r_star, rho], i.e. v(r_star); +inf if blow-up happens first
    double sup_v;
};

struct SweepOptions {
    double v_max = 1e8;
    /// far enough for the small-kappa critical blow-up (log R ~ -1/(2 rho^2 kappa^2))
    double log_r_min = -1e7;
    std::optional<double> r_star; // default rho/2
    OdeOptions ode{};
};

inline std::vector<SweepEntry> kappa_sweep(const OdeProblem& tmpl, const std::vector<double>& kappas,
                                           const SweepOptions& so = {}) {
    for (std::size_t i = 1; i < kappas.size(); ++i)
        if (!(kappas[i] < kappas[i - 1])) throw DomainError("kappa_sweep: kappas must decrease strictly");
    const double r_star = so.r_star.value_or(tmpl.rho / 2.0);
    return parallel_map(kappas.size(), [&](std::size_t i) {
        OdeProblem pb = tmpl;
        pb.kappa = kappas[i];
        OdeOptions o = so.ode;
        o.log_r_min = so.log_r_min;
        o.checkpoints_r.push_back(r_star);
        o.sample_spacing = std::max(o.sample_spacing, 1.0);
        auto tr = integrate_left(pb, 0.0, so.v_max, o);
        if (tr.terminal == Terminal::StepFailure) throw StepFailure(tr.message);
        double sup_v = std::numeric_limits<double>::infinity();
        if (!tr.checkpoints.empty()) sup_v = tr.checkpoints.front().v;
        return SweepEntry{pb.kappa, tr.terminal, tr.R_kappa, tr.log_R, sup_v};
    });
}

struct BvpShot {
    double kappa;
    Trajectory trajectory;
};

/// kappa with v_kappa(r_star) = eps, by safeguarded regula falsi on kappa.
/// Blow-up before r_star counts as overshooting.
inline BvpShot solve_bvp_eps(const OdeProblem& tmpl, double r_star, double eps, OdeOptions opt = {}) {
    if (!(r_star > 0.0 && r_star < tmpl.rho)) throw DomainError("solve_bvp_eps: need 0 < r_star < rho");
    if (!(eps > 0.0)) throw DomainError("solve_bvp_eps: eps must be positive");
    const double v_cap = std::max(1e8, 1e4 * eps);
    auto shoot = [&](double k) {
        OdeProblem pb = tmpl;
        pb.kappa = k;
        auto tr = integrate_left(pb, r_star, v_cap, opt);
        if (tr.terminal == Terminal::StepFailure) throw StepFailure(tr.message);
        const double v = tr.blew_up() ? std::numeric_limits<double>::infinity() : tr.samples.back().v;
        return std::pair{v - eps, std::move(tr)};
    };
    double lo = 0.0, flo = -eps;
    double hi = 1.0;
    auto shot_hi = shoot(hi);
    for (int k = 0; shot_hi.first < 0.0; ++k) {
        if (k > 200) throw BracketFailure("solve_bvp_eps: no kappa reaches v(r_star) = eps");
        lo = hi;
        flo = shot_hi.first;
        hi *= 2.0;
        shot_hi = shoot(hi);
    }
    double fhi = shot_hi.first;
    int side = 0;
    for (int it = 0; it < 400; ++it) {
        double mid;
        if (std::isfinite(fhi)) {
            mid = (lo * fhi - hi * flo) / (fhi - flo);
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        auto sm = shoot(mid);
        if (std::abs(sm.first) <= 1e-10 * eps || hi - lo <= 1e-15 * hi)
            return {mid, std::move(sm.second)};
        if (sm.first < 0.0) {
            lo = mid;
            flo = sm.first;
            if (side == -1 && std::isfinite(fhi)) fhi *= 0.5; // Illinois
            side = -1;
        } else {
            hi = mid;
            fhi = sm.first;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
    }
    throw BracketFailure("solve_bvp_eps: root search did not converge");
}

enum class ComparisonMode { IVP, BVP };

namespace detail {

inline bool same_coefficients(const OdeProblem& a, const OdeProblem& b) {
    const auto& x = a.eta;
    const auto& y = b.eta;
    return a.params == b.params && a.h_bar == b.h_bar && a.rho == b.rho && x.family == y.family &&
           x.beta == y.beta && x.epsilon_param == y.epsilon_param && x.gamma == y.gamma && x.sign == y.sign;
}

} // namespace detail

/// Checks the ordering conclusion of the ODE comparison lemma on the common
/// r-range. IVP: u(rho) <= v(rho), u'(rho) > v'(rho) imply u < v inside.
/// BVP: u > v at both ends imply u > v inside. A failed hypothesis returns true.
inline bool ode_comparison_check(const Trajectory& u, const Trajectory& v, ComparisonMode mode) {
    if (!detail::same_coefficients(u.problem, v.problem))
        throw IncompatibleProblems("ode_comparison_check: trajectories solve different equations");
    if (u.samples.size() < 2 || v.samples.size() < 2) return true;
    const double top = std::min(u.samples.front().log_r, v.samples.front().log_r);
    const double bottom = std::max(u.samples.back().log_r, v.samples.back().log_r);
    if (!(bottom < top)) return true;
    std::vector<double> grid;
    for (const auto* t : {&u, &v})
        for (const auto& s : t->samples)
            if (s.log_r <= top && s.log_r >= bottom) grid.push_back(s.log_r);
    grid.push_back(top);
    grid.push_back(bottom);
    std::sort(grid.begin(), grid.end(), std::greater<>());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    auto U = [&](double lr) { return *u.v_at_log_r(lr); };
    auto V = [&](double lr) { return *v.v_at_log_r(lr); };
    if (mode == ComparisonMode::IVP) {
        const auto& u0 = u.samples.front();
        const auto& v0 = v.samples.front();
        if (!(u0.v <= v0.v && u0.r_v_dot > v0.r_v_dot)) return true;
        for (double lr : grid) {
            if (lr >= top - 1e-12) continue;
            if (!(U(lr) < V(lr))) return false;
        }
        return true;
    }
    if (!(U(top) > V(top) && U(bottom) > V(bottom))) return true;
    for (double lr : grid)
        if (!(U(lr) > V(lr))) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Keller-Osserman bound for the barrier ODE:
//   v <= gamma r^{s/(p-1)-beta} (r - R)^{-2/(p-1)}

namespace detail {

/// r^2/vbar times the ODE residual of vbar at (log r, x = R/r).
inline double ko_ode_scaled_residual(const EtaCoefficients& eta, const ProblemParams& pp, double gamma,
                                     double log_r, double x) {
    const double p = pp.p;
    const double a = pp.s / (p - 1.0) - eta.beta();
    const double c = 2.0 / (p - 1.0);
    const double A = a - c / (1.0 - x);
    const double B = A * A - a + c / ((1.0 - x) * (1.0 - x));
    const auto e = eta.at(log_r);
    const double drift = 2.0 * e.ratio - eta.h_bar() * std::exp(log_r);
    const double expo = (eta.beta() * (p - 1.0) + 2.0 - pp.s) + (a * (p - 1.0) - 2.0);
    const double nonlin = std::exp(expo * log_r) * std::pow(e.S, p - 1.0) * std::pow(gamma, p - 1.0) /
                          ((1.0 - x) * (1.0 - x));
    return -B - drift * A + nonlin;
}

inline std::vector<std::pair<double, double>> ko_ode_points(double log_rho, double log_lo, double log_R) {
    std::vector<std::pair<double, double>> pts;
    const int n = 1500;
    if (std::isfinite(log_R)) {
        // geometric in log r - log R so the pole is resolved
        const double a = std::log(1e-9), b = std::log(log_rho - log_R);
        for (int i = 0; i < n; ++i) {
            const double gap = std::exp(a + (b - a) * i / (n - 1));
            const double lr = log_R + gap;
            pts.push_back({lr, std::exp(-gap)});
        }
    } else {
        for (int i = 0; i < n; ++i) pts.push_back({log_lo + (log_rho - log_lo) * i / (n - 1), 0.0});
    }
    return pts;
}

} // namespace detail

/// Smallest gamma = 2^k making the KO-ODE profile a super-solution on (R, rho].
inline double ode_ko_gamma(const OdeProblem& pb, double log_R, double log_r_lo) {
    const detail::EtaCoefficients eta(pb);
    const auto pts = detail::ko_ode_points(std::log(pb.rho), log_r_lo, log_R);
    double g = 1.0;
    for (int k = 0; k < 80; ++k, g *= 2.0) {
        bool ok = true;
        for (const auto& [lr, x] : pts)
            if (detail::ko_ode_scaled_residual(eta, pb.params, g, lr, x) < 0.0) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
    throw NonConvergence("ode_ko_gamma: no admissible gamma");
}

struct KoOdeCheck {
    double gamma = 0.0;
    double max_ratio = 0.0; // max v / vbar over the samples
    std::size_t violations = 0;
    bool ok() const { return violations == 0; }
};

/// Compares a trajectory against its KO-ODE super-solution with R = R_kappa
/// (R = 0 when the trajectory does not blow up).
inline KoOdeCheck ko_ode_check(const Trajectory& tr) {
    KoOdeCheck out;
    const auto& pb = tr.problem;
    const double log_R = tr.blew_up() ? tr.log_R : -std::numeric_limits<double>::infinity();
    out.gamma = ode_ko_gamma(pb, log_R, tr.log_r_min_target);
    const double p = pb.params.p;
    const double a = pb.params.s / (p - 1.0) - detail::base_exponent(pb.eta);
    const double c = 2.0 / (p - 1.0);
    for (const auto& s : tr.samples) {
        if (!(s.v > 0.0)) continue;
        const double x = std::isfinite(log_R) ? std::exp(log_R - s.log_r) : 0.0;
        if (!(x < 1.0)) { // sample at or beyond the extrapolated pole
            ++out.violations;
            continue;
        }
        const double log_bar = std::log(out.gamma) + a * s.log_r - c * (s.log_r + std::log1p(-x));
        const double ratio = std::exp(std::log(s.v) - log_bar);
        out.max_ratio = std::max(out.max_ratio, ratio);
        if (ratio > 1.0 + 1e-9) ++out.violations;
    }
    return out;
}

} // namespace hardy
