#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "asymptotics.hpp"
#include "barriers.hpp"
#include "ode_engine.hpp"
#include "radial_solver.hpp"
#include "regime.hpp"

/// The acceptance checks shared by the test binary and `reproduce`.
namespace hardy::acceptance {

struct Measure {
    std::string key;
    double value;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    double budget_seconds = 0.0;
    std::vector<Measure> measures;
    std::string detail;

    double measure(std::string_view key) const {
        for (const auto& m : measures)
            if (m.key == key) return m.value;
        return std::nan("");
    }
};

namespace detail {

/// Runs body, records wall time, and folds the time budget into `passed`.
inline CriterionResult timed(int id, std::string name, double budget,
                             const std::function<void(CriterionResult&)>& body) {
    CriterionResult r;
    r.id = id;
    r.name = std::move(name);
    r.budget_seconds = budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.seconds >= budget) {
        r.passed = false;
        if (!r.detail.empty()) r.detail += "; ";
        r.detail += "over time budget";
    }
    return r;
}

} // namespace detail

// ---------------------------------------------------------------------------

inline CriterionResult threshold_consistency(std::uint64_t seed = 20240917, int n = 1000) {
    return detail::timed(1, "threshold cross-consistency", 1.0, [&](CriterionResult& r) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        int mismatches = 0, near_ties = 0, existence = 0;
        for (int k = 0; k < n; ++k) {
            const double mu = -3.0 + 3.25 * U(rng);
            const double p = 5.0 - 4.0 * U(rng); // (1, 5]
            const double s = -2.0 + 7.0 * U(rng);
            const auto rep = existence_verdict(ProblemParams(mu, p, s));
            const double bm = rep.roots->beta_minus;
            // comparison quantities; a point closer than 1e-10 to any flip is a tie
            const double m_s = std::abs(s - *rep.threshold_s);
            const double m_p = rep.p_star->is_finite() ? std::abs(p - rep.p_star->value) : 1.0;
            const double m_mu = s >= (p + 3.0) / 2.0 ? 1.0 : std::abs(mu - rep.mu_star);
            if (std::min({m_s, m_p, m_mu}) <= 1e-10 || std::abs(bm) <= 1e-10) {
                ++near_ties;
                continue;
            }
            const auto v1 = rep.verdict, v2 = verdict_from_p_star(rep), v3 = verdict_from_mu_star(rep);
            if (v1 != v2 || v1 != v3) ++mismatches;
            if (v1 == Verdict::Existence) ++existence;
        }
        r.measures = {{"samples", double(n)}, {"mismatches", double(mismatches)},
                      {"near_ties", double(near_ties)}, {"existence", double(existence)}};
        r.passed = mismatches == 0;
    });
}

inline CriterionResult barrier_signs() {
    return detail::timed(2, "barrier sign dichotomy", 1.0, [&](CriterionResult& r) {
        const DistanceWindow w{1e-6, 0.05, 1000};
        const auto pts = sample_points(w);
        int failures = 0, checked = 0;
        double worst_root = 0.0;
        for (double mu : {-1.0, -0.25, 0.0, 0.2, 0.25}) {
            const double eps = default_barrier_epsilon(mu);
            const ProblemParams pp(mu, 2.0, 0.0);
            for (const auto& nb : local_barriers(mu, eps)) {
                ++checked;
                if (validity_radius(nb.spec, pp, w) < w.delta_max) {
                    ++failures;
                    r.detail += "mu=" + std::to_string(mu) + " " + nb.name + " fails; ";
                }
            }
            const auto roots = *characteristic_roots(mu);
            for (double beta : {roots.beta_minus, roots.beta_plus}) {
                const auto h = pure_power(beta, Role::SuperHarmonic);
                for (double d : pts) {
                    const double rel = std::abs(linear_residual(h, pp, d)) / residual_scale(h, pp, d, false);
                    worst_root = std::max(worst_root, rel);
                }
            }
        }
        r.measures = {{"barriers_checked", double(checked)},
                      {"sign_failures", double(failures)},
                      {"max_rel_residual_at_roots", worst_root}};
        r.passed = failures == 0 && worst_root < 1e-12;
    });
}

inline CriterionResult ode_dichotomy() {
    return detail::timed(3, "ODE dichotomy", 30.0, [&](CriterionResult& r) {
        struct Case {
            ProblemParams pp;
            bool expect;
        };
        std::vector<Case> cases;
        for (double mu : {-1.0, 0.0, 0.25})
            for (double p : {1.5, 2.0, 3.0}) {
                const double th = characteristic_roots(mu)->beta_minus * (p - 1.0) + 2.0;
                for (double ds : {-0.5, 0.0, 0.5}) {
                    ProblemParams pp(mu, p, th + ds);
                    cases.push_back({pp, existence_verdict(pp).verdict == Verdict::Nonexistence});
                }
            }
        struct Out {
            bool blew, agree;
            double drift;
        };
        auto outs = parallel_map(cases.size(), [&](std::size_t i) {
            const auto pb = make_ode_problem(cases[i].pp, 1.0);
            const auto tr = integrate_left(pb, 1e-6, 1e8);
            const bool agree = cases[i].expect ? tr.terminal == Terminal::BlowUp : tr.terminal == Terminal::ReachedRMin;
            Out o{tr.blew_up(), agree, 0.0};
            if (tr.blew_up()) {
                OdeOptions half;
                half.rtol /= 2.0;
                half.atol /= 2.0;
                const auto tr2 = integrate_left(pb, 1e-6, 1e8, half);
                o.drift = tr2.blew_up() ? std::abs(tr2.R_kappa - tr.R_kappa) / tr.R_kappa : 1.0;
            }
            return o;
        });
        int mismatches = 0, blowups = 0;
        double drift = 0.0;
        for (std::size_t i = 0; i < outs.size(); ++i) {
            mismatches += !outs[i].agree;
            blowups += outs[i].blew;
            drift = std::max(drift, outs[i].drift);
        }
        r.measures = {{"cases", double(cases.size())}, {"mismatches", double(mismatches)},
                      {"blowups", double(blowups)}, {"max_rel_R_change_tol_halving", drift}};
        r.passed = mismatches == 0 && drift < 1e-3;
    });
}

inline CriterionResult kappa_limits() {
    return detail::timed(4, "kappa-sweep limits", 10.0, [&](CriterionResult& r) {
        const auto pb = make_ode_problem(ProblemParams(0.0, 3.0, 2.0), 1.0);
        const auto sw = kappa_sweep(pb, {1.0, 1e-1, 1e-2, 1e-3});
        bool all_blow = true, R_nonincreasing = true, sup_decreasing = true;
        for (std::size_t i = 0; i < sw.size(); ++i) {
            all_blow = all_blow && sw[i].terminal == Terminal::BlowUp;
            if (i > 0) {
                R_nonincreasing = R_nonincreasing && sw[i].log_R <= sw[i - 1].log_R;
                sup_decreasing = sup_decreasing && sw[i].sup_v < sw[i - 1].sup_v;
            }
            r.measures.push_back({"log_R(kappa=" + std::to_string(sw[i].kappa) + ")", sw[i].log_R});
            r.measures.push_back({"sup_v(kappa=" + std::to_string(sw[i].kappa) + ")", sw[i].sup_v});
        }
        // R(1e-3) < R(1)/2, compared in logs since R(1e-3) underflows
        const bool halved = sw.back().log_R < sw.front().log_R - std::log(2.0);
        const bool small = sw.back().sup_v < 1e-3;
        r.passed = all_blow && R_nonincreasing && sup_decreasing && halved && small;
    });
}

/// Exhaustion configuration shared by criteria 5 and 8.
inline ExhaustionResult xxl_slab_exhaustion() {
    return exhaustion_solve(ProblemParams(0.0, 3.0, 0.0), Geometry::slab(), {2e-5, 1.5e-5, 1.25e-5, 1e-5},
                            {1e2, 1e4, 1e6, 1e8});
}

inline CriterionResult xxl_amplitude() {
    return detail::timed(5, "exact XXL amplitude", 10.0, [&](CriterionResult& r) {
        const auto ex = xxl_slab_exhaustion();
        const auto fit = fit_power(ex.limit.delta, ex.limit.u, {1e-4, 1e-2});
        const double amp_err = std::abs(fit.amplitude - std::sqrt(2.0)) / std::sqrt(2.0);
        const double exp_err = std::abs(fit.exponent + 1.0);
        r.measures = {{"amplitude", fit.amplitude},     {"exponent", fit.exponent},
                      {"amplitude_rel_error", amp_err}, {"exponent_error", exp_err},
                      {"limit_valid_from", ex.limit.valid_from}, {"cauchy_gap_in_M", ex.cauchy_gap}};
        r.passed = amp_err < 0.02 && exp_err < 0.02 && ex.limit.valid_from <= 1e-4 && ex.monotone_in_M &&
                   ex.cauchy_in_M && ex.monotone_in_eps;
    });
}

inline std::vector<ProblemParams> exponent_recovery_cases() {
    return {ProblemParams(-1.0, 2.0, 0.0), ProblemParams(0.2, 3.0, 1.0), ProblemParams(0.25, 2.0, 1.0)};
}

inline ExhaustionResult existence_exhaustion(const ProblemParams& pp) {
    return exhaustion_solve(pp, Geometry::slab(), {2e-5, 1.5e-5, 1.25e-5, 1e-5}, {1e2, 1e4, 1e6, 1e8});
}

/// Fit window of criterion 6: two decades starting at 1e-3, inside the region
/// where the eps-extrapolation is trusted.
inline FitWindow exponent_window() { return {1e-3, 1e-1}; }

inline CriterionResult exponent_recovery() {
    return detail::timed(6, "exponent recovery in the existence regime", 60.0, [&](CriterionResult& r) {
        bool ok = true;
        for (const auto& pp : exponent_recovery_cases()) {
            const auto rep = existence_verdict(pp);
            const auto ex = existence_exhaustion(pp);
            const auto fit = fit_power(ex.limit.delta, ex.limit.u, exponent_window());
            const double err = std::abs(fit.exponent - pp.ko_exponent());
            const std::string tag = "(" + std::to_string(pp.mu) + "," + std::to_string(pp.p) + "," +
                                    std::to_string(pp.s) + ")";
            r.measures.push_back({"exponent" + tag, fit.exponent});
            r.measures.push_back({"target" + tag, pp.ko_exponent()});
            ok = ok && rep.verdict == Verdict::Existence && err < 0.05 && !ex.limit.trivial &&
                 ex.limit.valid_from <= exponent_window().lo;
        }
        r.passed = ok;
    });
}

inline ExhaustionResult collapse_exhaustion() {
    return exhaustion_solve(ProblemParams(0.0, 3.0, 2.5), Geometry::slab(), {1e-2, 1e-3, 1e-4}, {1e6});
}

inline CriterionResult nonexistence_collapse() {
    return detail::timed(7, "nonexistence collapse", 60.0, [&](CriterionResult& r) {
        const ProblemParams pp(0.0, 3.0, 2.5);
        const auto rep = existence_verdict(pp);
        const auto ex = collapse_exhaustion();
        bool decreasing = true;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ex.eps.size(); ++i) {
            const double v = *ex.at(i, 0).value_at(0.5);
            r.measures.push_back({"u(0.5) eps=" + std::to_string(ex.eps[i]), v});
            decreasing = decreasing && v < prev;
            prev = v;
        }
        for (std::size_t i = 0; i < ex.limit.decay_rates.size(); ++i)
            r.measures.push_back({"decay_rate_" + std::to_string(i), ex.limit.decay_rates[i]});
        const auto cls = classify_profile(ex.limit.delta, ex.limit.u, {0.1, 0.9}, rep);
        r.detail = "limit class " + std::string(to_string(cls.verdict)) + (cls.trivial ? " (trivial)" : "");
        r.passed = rep.verdict == Verdict::Nonexistence && decreasing && cls.verdict == SolutionVerdict::S;
    });
}

inline CriterionResult ko_enforcement() {
    return detail::timed(8, "KO bound enforcement", 60.0, [&](CriterionResult& r) {
        std::vector<ExhaustionResult> all;
        all.push_back(xxl_slab_exhaustion());
        for (const auto& pp : exponent_recovery_cases()) all.push_back(existence_exhaustion(pp));
        all.push_back(collapse_exhaustion());
        std::size_t solutions = 0, violations = 0, limit_violations = 0;
        double worst = 0.0;
        for (const auto& ex : all) {
            for (const auto& s : ex.solutions) {
                ++solutions;
                violations += s.ko_violations;
                worst = std::max(worst, s.ko_max_ratio);
            }
            limit_violations += ex.limit.ko_violations;
        }
        r.measures = {{"solutions", double(solutions)},
                      {"violations", double(violations)},
                      {"max_u_over_bound", worst},
                      {"limit_profile_violations", double(limit_violations)}};
        r.passed = violations == 0 && limit_violations == 0;
    });
}

/// Random ordered pairs: sub = a * (discrete solution with inner value M1),
/// sup = b * (discrete solution with inner value M2), a <= 1 <= b, M1 <= M2.
/// Scaling down keeps a sub-solution and scaling up keeps a super-solution.
inline CriterionResult comparison_property(std::uint64_t seed = 7, int trials = 100) {
    return detail::timed(9, "discrete comparison principle", 5.0, [&](CriterionResult& r) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        int failures = 0, precondition = 0;
        for (int t = 0; t < trials; ++t) {
            const double mu = -1.0 + 1.25 * U(rng);
            const double p = 1.5 + 2.5 * U(rng);
            const double s = -1.0 + 2.0 * U(rng);
            const ProblemParams pp(mu, p, s);
            const Geometry g = U(rng) < 0.5 ? Geometry::slab() : Geometry::ball(2 + int(3 * U(rng)));
            const auto grid = Grid::geometric(1e-3, 200);
            const double M1 = std::pow(10.0, 4.0 * U(rng));
            const double M2 = M1 * std::pow(10.0, 2.0 * U(rng));
            const double a = U(rng), b = 1.0 + U(rng);
            auto solve = [&](double M) {
                DiscreteOperator op(g, pp, grid, InnerBC::dirichlet(M), 0.0);
                return solve_bvp(op, ko_initial_iterate(op));
            };
            auto lo = solve(M1), hi = solve(M2);
            for (auto& v : lo.values) v *= a;
            for (auto& v : hi.values) v *= b;
            try {
                if (!discrete_comparison_check(lo, hi)) ++failures;
            } catch (const PreconditionError&) {
                ++precondition;
            }
        }
        r.measures = {{"trials", double(trials)},
                      {"failures", double(failures)},
                      {"precondition_errors", double(precondition)}};
        r.passed = failures == 0 && precondition == 0;
    });
}

inline CriterionResult supercritical_mu() {
    return detail::timed(10, "mu > 1/4 solutions on the ball", 10.0, [&](CriterionResult& r) {
        const ProblemParams pp(1.0, 2.0, 0.0);
        const auto g = Geometry::ball(3);
        const auto grid = Grid::geometric(1e-6, 2000);
        const auto coarse = solve_zero_bc(pp, g, grid);
        const auto fine = solve_zero_bc(pp, g, Grid::geometric(5e-7, 4000));
        bool positive = true;
        for (std::size_t i = 1; i < coarse.values.size(); ++i) positive = positive && coarse.values[i] > 0.0;
        double change = 0.0;
        for (std::size_t i = 0; i < grid.n(); ++i) {
            const double d = grid.nodes[i];
            if (d < 0.1 || d > 0.9) continue;
            change = std::max(change, std::abs(*fine.value_at(d) - coarse.values[i]) / coarse.values[i]);
        }
        r.measures = {{"u_centre", coarse.values.back()},
                      {"newton_iterations", double(coarse.iterations)},
                      {"ko_gamma", coarse.ko_gamma},
                      {"ko_violations", double(coarse.ko_violations + fine.ko_violations)},
                      {"mesh_rel_change", change}};
        r.passed = positive && coarse.ko_violations == 0 && fine.ko_violations == 0 && change < 1e-3;
    });
}

// ---------------------------------------------------------------------------

enum class Suite { thresholds, ode_lemma, xxl_slab, exhaustion, all };

inline std::optional<Suite> parse_suite(std::string_view s) {
    if (s == "thresholds") return Suite::thresholds;
    if (s == "ode_lemma") return Suite::ode_lemma;
    if (s == "xxl_slab") return Suite::xxl_slab;
    if (s == "exhaustion") return Suite::exhaustion;
    if (s == "all") return Suite::all;
    return std::nullopt;
}

/// thresholds: 1, 2, 9. ode_lemma: 3, 4. xxl_slab: 5, 10. exhaustion: 6, 7, 8.
inline std::vector<int> suite_criteria(Suite s) {
    switch (s) {
    case Suite::thresholds: return {1, 2, 9};
    case Suite::ode_lemma: return {3, 4};
    case Suite::xxl_slab: return {5, 10};
    case Suite::exhaustion: return {6, 7, 8};
    case Suite::all: return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    }
    return {};
}

inline CriterionResult run_criterion(int id) {
    switch (id) {
    case 1: return threshold_consistency();
    case 2: return barrier_signs();
    case 3: return ode_dichotomy();
    case 4: return kappa_limits();
    case 5: return xxl_amplitude();
    case 6: return exponent_recovery();
    case 7: return nonexistence_collapse();
    case 8: return ko_enforcement();
    case 9: return comparison_property();
    case 10: return supercritical_mu();
    }
    throw DomainError("no acceptance criterion " + std::to_string(id));
}

inline std::vector<CriterionResult> run_suite(Suite s) {
    std::vector<CriterionResult> out;
    for (int id : suite_criteria(s)) out.push_back(run_criterion(id));
    return out;
}

} // namespace hardy::acceptance
