#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "acceptance.hpp"
#include "asymptotics.hpp"
#include "barriers.hpp"
#include "geometry.hpp"
#include "ode_engine.hpp"
#include "parallel.hpp"
#include "radial_solver.hpp"
#include "regime.hpp"

namespace hardy::cli {

using Json = nlohmann::ordered_json;

enum ExitCode { Ok = 0, DomainFailure = 1, VerificationFailure = 2, Usage = 64 };

/// Full round-trip precision for CSV cells.
inline std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// JSON cannot hold inf/nan; those become strings.
inline Json jnum(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "+inf" : "-inf";
}

class Output {
public:
    Output(std::ostream& fallback, const std::string& path) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw DomainError("cannot open output file: " + path);
            os_ = file_.get();
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

// ---------------------------------------------------------------------------
// JSON views of results

inline Json to_json(const RegimeReport& r) {
    Json j;
    j["mu"] = r.params.mu;
    j["p"] = r.params.p;
    j["s"] = r.params.s;
    if (r.roots) {
        j["roots"] = {{"beta_minus", r.roots->beta_minus},
                      {"beta_plus", r.roots->beta_plus},
                      {"degenerate", r.roots->degenerate}};
        j["threshold_s"] = *r.threshold_s;
        j["p_star"] = r.p_star->is_finite() ? Json(r.p_star->value) : Json(r.p_star->to_string());
    } else {
        j["roots"] = nullptr;
        j["threshold_s"] = nullptr;
        j["p_star"] = nullptr;
    }
    j["ko_exponent"] = r.ko_exponent;
    j["mu_star"] = r.mu_star;
    j["verdict"] = std::string(to_string(r.verdict));
    j["verdict_from_p_star"] = std::string(to_string(verdict_from_p_star(r)));
    j["verdict_from_mu_star"] = std::string(to_string(verdict_from_mu_star(r)));
    return j;
}

inline Json to_json(const AsymptoticFit& f) {
    return {{"amplitude", jnum(f.amplitude)},
            {"exponent", jnum(f.exponent)},
            {"log_power", jnum(f.log_power)},
            {"fit_window", {f.window.lo, f.window.hi}},
            {"max_rel_residual", jnum(f.max_rel_residual)},
            {"model", std::string(to_string(f.model))},
            {"n_samples", f.n_samples}};
}

inline Json to_json(const GridSolution& s) {
    return {{"residual_norm", s.residual_norm}, {"iterations", s.iterations},
            {"ko_gamma", s.ko_gamma},           {"ko_pole", s.ko_pole},
            {"ko_violations", s.ko_violations}, {"ko_max_ratio", s.ko_max_ratio},
            {"bracket_used", s.bracket_used},   {"bc_inner", s.bc_inner.M},
            {"bc_outer", s.bc_outer},           {"nodes", s.grid.n()}};
}

inline Json to_json(const acceptance::CriterionResult& r, bool timing) {
    Json m = Json::object();
    for (const auto& x : r.measures) m[x.key] = jnum(x.value);
    Json j = {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"measures", m}, {"detail", r.detail}};
    if (timing) {
        j["seconds"] = r.seconds;
        j["budget_seconds"] = r.budget_seconds;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Config files: a JSON object whose keys are flag names. Flags given on the
// command line win. Arrays (of objects) are batch runs, supported by `regime`.

namespace detail {

inline std::string flag_value(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return num(v.get<double>());
    if (v.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + flag_value(v[i]);
        return out;
    }
    throw DomainError("config: unsupported value " + v.dump());
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw DomainError("invalid JSON in " + path + ": " + e.what());
    }
}

/// Splices config keys into argv after the subcommand words. Keys already
/// present as flags are skipped.
inline std::vector<std::string> apply_config(std::vector<std::string> args, const Json& cfg) {
    std::size_t insert_at = 0;
    while (insert_at < args.size() && !args[insert_at].empty() && args[insert_at][0] != '-') ++insert_at;
    std::vector<std::string> extra;
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        const std::string flag = "--" + it.key();
        bool given = false;
        for (const auto& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
        if (given) continue;
        if (it.value().is_boolean()) {
            if (it.value().get<bool>()) extra.push_back(flag);
            continue;
        }
        extra.push_back(flag);
        extra.push_back(flag_value(it.value()));
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), extra.begin(), extra.end());
    return args;
}

inline std::vector<double> read_pairs_csv(const std::string& path, std::vector<double>& delta) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    std::vector<double> u;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) continue;
        try {
            std::size_t ia = 0, ib = 0;
            const double d = std::stod(a, &ia);
            const double v = std::stod(b, &ib);
            delta.push_back(d);
            u.push_back(v);
        } catch (const std::invalid_argument&) {
            if (delta.empty()) continue; // header
            throw DomainError("bad CSV line: " + line);
        }
    }
    return u;
}

} // namespace detail

// ---------------------------------------------------------------------------

struct ParamsOpt {
    double mu = 0.0, p = 2.0, s = 0.0;
    void add(CLI::App* app, bool required = true) {
        auto* a = app->add_option("--mu", mu, "Hardy coefficient mu");
        auto* b = app->add_option("--p", p, "exponent p > 1");
        auto* c = app->add_option("--s", s, "weight exponent s");
        if (required) {
            a->required();
            b->required();
            c->required();
        }
    }
    ProblemParams get() const { return ProblemParams(mu, p, s); }
};

struct GeometryOpt {
    std::string kind = "slab";
    int dim = 3;
    void add(CLI::App* app) {
        app->add_option("--geometry", kind, "slab or ball")->check(CLI::IsMember({"slab", "ball"}));
        app->add_option("--dim", dim, "ball dimension N >= 2");
    }
    Geometry get() const { return parse_geometry(kind, dim); }
};

inline int run_regime(const ParamsOpt& po, const std::string& batch, const Json* cfg_array, std::ostream& out) {
    std::vector<ProblemParams> items;
    auto add_item = [&](const Json& e) {
        if (e.is_array() && e.size() == 3) items.emplace_back(e[0].get<double>(), e[1].get<double>(), e[2].get<double>());
        else if (e.is_object()) items.emplace_back(e.at("mu").get<double>(), e.at("p").get<double>(), e.at("s").get<double>());
        else throw DomainError("batch entries must be [mu, p, s] or {mu, p, s}");
    };
    Json arr;
    if (!batch.empty()) arr = detail::read_json_file(batch);
    else if (cfg_array) arr = *cfg_array;
    if (!arr.is_null()) {
        if (!arr.is_array()) throw DomainError("batch input must be a JSON array");
        try {
            for (const auto& e : arr) add_item(e);
        } catch (const Json::exception& e) {
            throw DomainError(std::string("batch entry: ") + e.what());
        }
        auto reports = parallel_map(items.size(), [&](std::size_t i) { return to_json(existence_verdict(items[i])); });
        Json j = Json::array();
        for (auto& r : reports) j.push_back(std::move(r));
        out << j.dump(2) << "\n";
        return Ok;
    }
    out << to_json(existence_verdict(po.get())).dump(2) << "\n";
    return Ok;
}

struct WindowOpt {
    double lo = 1e-6, hi = 0.05;
    int n = 1000;
    void add(CLI::App* app) {
        app->add_option("--delta-min", lo, "window start");
        app->add_option("--delta-max", hi, "window end");
        app->add_option("--samples", n, "geometric sample count");
    }
    DistanceWindow get() const { return {lo, hi, n}; }
};

inline BarrierSpec named_barrier(const std::string& family, const ProblemParams& pp, std::optional<double> eps,
                                 const Geometry& g) {
    if (family == "ko")
        return ko_supersolution(pp, eps.value_or(0.0), distance_model(g), g.dim);
    auto roots = characteristic_roots(pp.mu);
    if (!roots) throw DomainError("no barriers for mu > 1/4");
    if (family == "pure_minus") return pure_power(roots->beta_minus, Role::SuperHarmonic);
    if (family == "pure_plus") return pure_power(roots->beta_plus, Role::SuperHarmonic);
    return local_barrier(family, pp.mu, eps.value_or(default_barrier_epsilon(pp.mu)));
}

inline int run_barrier(const std::string& family, const ParamsOpt& po, std::optional<double> eps,
                       const GeometryOpt& go, const WindowOpt& wo, std::ostream& out) {
    const auto pp = po.get();
    const auto spec = named_barrier(family, pp, eps, go.get());
    const bool solution = spec.is_ko();
    out << "delta,value,residual\n";
    for (double d : sample_points(wo.get())) {
        if (solution && !(d > spec.epsilon_param)) continue;
        const double res = solution ? solution_residual(spec, pp, d) : linear_residual(spec, pp, d);
        out << num(d) << ',' << num(eval_barrier(spec, d)) << ',' << num(res) << '\n';
    }
    return Ok;
}

inline int run_barrier_verify(double mu, std::optional<double> eps, const WindowOpt& wo, std::ostream& out) {
    const ProblemParams pp(mu, 2.0, 0.0);
    const double e = eps.value_or(default_barrier_epsilon(mu));
    const auto w = wo.get();
    Json list = Json::array();
    bool ok = true;
    for (const auto& nb : local_barriers(mu, e)) {
        std::string diag;
        const double rho = validity_radius(nb.spec, pp, w, &diag);
        const bool good = rho >= w.delta_max;
        ok = ok && good;
        list.push_back({{"name", nb.name},
                        {"role", std::string(to_string(nb.spec.claimed_role))},
                        {"validity_radius", rho},
                        {"ok", good},
                        {"diagnostic", diag}});
    }
    const auto roots = *characteristic_roots(mu);
    double worst = 0.0;
    for (double beta : {roots.beta_minus, roots.beta_plus}) {
        const auto h = pure_power(beta, Role::SuperHarmonic);
        for (double d : sample_points(w))
            worst = std::max(worst, std::abs(linear_residual(h, pp, d)) / residual_scale(h, pp, d, false));
    }
    ok = ok && worst < 1e-12;
    Json j = {{"mu", mu}, {"eps", e}, {"barriers", list}, {"harmonic_max_rel_residual", worst}, {"ok", ok}};
    out << j.dump(2) << "\n";
    return ok ? Ok : VerificationFailure;
}

struct ShootOpt {
    double kappa = 1.0;
    std::optional<double> eta_eps, rho;
    double r_min = 1e-6, v_max = 1e8, rtol = 1e-9, atol = 1e-12, spacing = 0.0;
    std::vector<double> thresholds;
    std::optional<double> target_eps, r_star, compare_kappa;
    std::string mode = "ivp";
    std::string out_path;
};

inline void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
    os << "r,v,v_dot,log_r\n";
    for (const auto& s : tr.samples)
        os << num(s.r()) << ',' << num(s.v) << ',' << num(s.v_dot()) << ',' << num(s.log_r) << '\n';
}

inline Json trajectory_summary(const Trajectory& tr) {
    const auto ko = ko_ode_check(tr);
    return {{"terminal", std::string(to_string(tr.terminal))},
            {"R_kappa", jnum(tr.R_kappa)},
            {"log_R", jnum(tr.log_R)},
            {"error_estimate", jnum(tr.error_estimate)},
            {"steps", tr.steps},
            {"rejected", tr.rejected},
            {"monotone", tr.monotone()},
            {"ko_ode", {{"gamma", ko.gamma}, {"max_ratio", jnum(ko.max_ratio)}, {"violations", ko.violations}}}};
}

inline int run_shoot(const ParamsOpt& po, const GeometryOpt& go, const ShootOpt& so, std::ostream& out) {
    const auto pb = make_ode_problem(po.get(), so.kappa, go.get(), so.eta_eps, so.rho);
    OdeOptions opt;
    opt.rtol = so.rtol;
    opt.atol = so.atol;
    opt.sample_spacing = so.spacing;
    Json j;
    Trajectory tr;
    if (so.target_eps) {
        if (!so.r_star) throw DomainError("--target-eps needs --r-star");
        auto shot = solve_bvp_eps(pb, *so.r_star, *so.target_eps, opt);
        tr = std::move(shot.trajectory);
        j = trajectory_summary(tr);
        j["bvp"] = {{"kappa", shot.kappa}, {"r_star", *so.r_star}, {"v_at_r_star", tr.samples.back().v}};
    } else {
        tr = integrate_left(pb, so.r_min, so.v_max, opt);
        j = trajectory_summary(tr);
    }
    if (!so.thresholds.empty()) {
        const auto b = detect_blowup_radius(pb, so.thresholds, so.r_min, opt);
        j["blowup"] = {{"R", b.R}, {"log_R", b.log_R}, {"error_estimate", b.error_estimate}, {"abs_error", b.abs_error}};
    }
    if (so.compare_kappa) {
        OdeProblem other = pb;
        other.kappa = *so.compare_kappa;
        const auto tr2 = integrate_left(other, so.r_min, so.v_max, opt);
        const auto mode = so.mode == "bvp" ? ComparisonMode::BVP : ComparisonMode::IVP;
        j["comparison"] = {{"kappa", *so.compare_kappa},
                           {"mode", so.mode},
                           {"holds", ode_comparison_check(tr, tr2, mode)}};
    }
    if (!so.out_path.empty()) {
        Output csv(out, so.out_path);
        write_trajectory_csv(tr, *csv);
    }
    out << j.dump(2) << "\n";
    return Ok;
}

struct SweepOpt {
    std::vector<double> kappas = {1.0, 0.1, 0.01, 0.001};
    std::optional<double> eta_eps, rho, r_star;
    double v_max = 1e8, log_r_min = -1e7;
    std::string out_path;
};

inline int run_sweep(const ParamsOpt& po, const GeometryOpt& go, const SweepOpt& so, std::ostream& out) {
    const auto pb = make_ode_problem(po.get(), 1.0, go.get(), so.eta_eps, so.rho);
    SweepOptions opt;
    opt.v_max = so.v_max;
    opt.log_r_min = so.log_r_min;
    opt.r_star = so.r_star;
    const auto rows = kappa_sweep(pb, so.kappas, opt);
    Output csv(out, so.out_path);
    *csv << "kappa,R_kappa,log_R,sup_v,terminal\n";
    for (const auto& e : rows)
        *csv << num(e.kappa) << ',' << num(e.R_kappa) << ',' << num(e.log_R) << ',' << num(e.sup_v) << ','
             << to_string(e.terminal) << '\n';
    return Ok;
}

struct SolveOpt {
    std::string bc_inner = "zero";
    double bc_outer = 0.0;
    double delta_min = 1e-6;
    std::size_t n = 2000;
    double tol = 1e-10;
    bool exhaust = false;
    std::vector<double> eps_list = {2e-5, 1.5e-5, 1.25e-5, 1e-5};
    std::vector<double> M_list = {1e2, 1e4, 1e6, 1e8};
    std::string pair;
    std::optional<double> compare_bc;
    std::string out_path;
};

inline void write_profile_csv(const std::vector<double>& d, const std::vector<double>& u, std::ostream& os) {
    os << "delta,u\n";
    for (std::size_t i = 0; i < d.size(); ++i) os << num(d[i]) << ',' << num(u[i]) << '\n';
}

inline int run_solve(const ParamsOpt& po, const GeometryOpt& go, const SolveOpt& so, std::ostream& out) {
    const auto pp = po.get();
    const auto g = go.get();
    if (g.is_ball() && so.bc_outer != 0.0) throw DomainError("--bc-outer does not apply to the ball");
    SolveOptions sopt;
    sopt.tol = so.tol;
    Json j;
    if (so.exhaust) {
        ExhaustionOptions eo;
        eo.n = so.n;
        eo.tol = so.tol;
        const auto ex = exhaustion_solve(pp, g, so.eps_list, so.M_list, eo);
        Json sols = Json::array();
        for (std::size_t i = 0; i < ex.eps.size(); ++i)
            for (std::size_t k = 0; k < ex.M.size(); ++k) {
                Json e = to_json(ex.at(i, k));
                e["eps"] = ex.eps[i];
                e["M"] = ex.M[k];
                sols.push_back(e);
            }
        Json rates = Json::array();
        for (double r : ex.limit.decay_rates) rates.push_back(jnum(r));
        j = {{"monotone_in_M", ex.monotone_in_M},
             {"cauchy_in_M", ex.cauchy_in_M},
             {"cauchy_gap", ex.cauchy_gap},
             {"monotone_in_eps", ex.monotone_in_eps},
             {"limit", {{"trivial", ex.limit.trivial},
                        {"valid_from", ex.limit.valid_from},
                        {"decay_rates", rates},
                        {"ko_gamma", ex.limit.ko_gamma},
                        {"ko_violations", ex.limit.ko_violations}}},
             {"solutions", sols}};
        if (!so.out_path.empty()) {
            Output csv(out, so.out_path);
            write_profile_csv(ex.limit.delta, ex.limit.u, *csv);
        }
        out << j.dump(2) << "\n";
        return Ok;
    }
    const auto grid = Grid::geometric(so.delta_min, so.n);
    GridSolution sol;
    if (!so.pair.empty()) {
        const auto target = so.pair == "ml" ? PairTarget::ML : PairTarget::XXL;
        const auto pr = build_subsuper_pair(pp, g, grid, target);
        sol = solve_bracketed(pp, g, grid, pr, sopt);
        j = to_json(sol);
        j["pair"] = {{"target", so.pair}, {"rho", pr.rho}, {"ordered", pr.ordered}, {"inner_value", pr.inner_value}};
    } else {
        const double M = so.bc_inner == "zero" ? 0.0 : std::stod(so.bc_inner);
        DiscreteOperator op(g, pp, grid, InnerBC::dirichlet(M), so.bc_outer);
        sol = solve_bvp(op, ko_initial_iterate(op), sopt);
        j = to_json(sol);
        if (so.compare_bc) {
            DiscreteOperator op2(g, pp, grid, InnerBC::dirichlet(*so.compare_bc), so.bc_outer);
            const auto other = solve_bvp(op2, ko_initial_iterate(op2), sopt);
            const bool lower_first = *so.compare_bc >= M;
            const auto& lo = lower_first ? sol : other;
            const auto& hi = lower_first ? other : sol;
            j["comparison"] = {{"bc_inner", *so.compare_bc}, {"ordered", discrete_comparison_check(lo, hi)}};
        }
    }
    if (!so.out_path.empty()) {
        Output csv(out, so.out_path);
        write_profile_csv(sol.grid.nodes, sol.values, *csv);
    }
    out << j.dump(2) << "\n";
    return Ok;
}

inline int run_classify(const ParamsOpt& po, const std::string& input, const std::vector<double>& window,
                        const std::string& model, std::ostream& out) {
    std::vector<double> delta;
    const auto u = detail::read_pairs_csv(input, delta);
    if (delta.empty()) throw InsufficientSamples("classify: no samples in " + input);
    FitWindow w;
    if (window.size() == 2) w = {window[0], window[1]};
    else if (window.empty()) w = default_fit_window(*std::min_element(delta.begin(), delta.end()));
    else throw DomainError("--window takes two values lo,hi");
    const auto rep = existence_verdict(po.get());
    SolutionClass c;
    if (model == "auto") {
        c = classify_profile(delta, u, w, rep);
    } else {
        const auto fit = model == "log" ? fit_power_log(delta, u, w) : fit_power(delta, u, w);
        c = classify(fit, rep);
    }
    Json j = {{"verdict", std::string(to_string(c.verdict))},
              {"trivial", c.trivial},
              {"diagnostic", c.diagnostic},
              {"evidence", to_json(c.evidence)},
              {"thresholds", {{"beta_minus", c.roots.beta_minus},
                              {"beta_plus", c.roots.beta_plus},
                              {"ko_exponent", c.ko_exponent}}}};
    if (!c.trivial && c.evidence.model == FitModel::PurePower) {
        try {
            const auto ws = window_sensitivity(delta, u, w);
            j["window_sensitivity"] = {{"shifted_exponent", ws.shifted_exponent},
                                       {"change", ws.change},
                                       {"under_resolved", ws.under_resolved}};
        } catch (const InsufficientSamples&) {
        }
    }
    out << j.dump(2) << "\n";
    return Ok;
}

inline int run_reproduce(const std::string& suite, bool timing, std::ostream& out) {
    const auto s = acceptance::parse_suite(suite);
    if (!s) throw DomainError("unknown suite: " + suite);
    const auto results = acceptance::run_suite(*s);
    bool ok = true;
    Json list = Json::array();
    for (const auto& r : results) {
        ok = ok && r.passed;
        list.push_back(to_json(r, timing));
    }
    out << Json{{"suite", suite}, {"passed", ok}, {"criteria", list}}.dump(2) << "\n";
    return ok ? Ok : VerificationFailure;
}

// ---------------------------------------------------------------------------

/// Parses argv and runs one subcommand. Domain errors become a JSON object on
/// `err` and exit 1; malformed flags exit 64.
inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::optional<Json> cfg_array;
    try {
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] != "--config") continue;
            if (i + 1 >= args.size()) {
                err << "--config needs a path\n";
                return Usage;
            }
            const auto cfg = detail::read_json_file(args[i + 1]);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            if (cfg.is_array()) cfg_array = cfg;
            else if (cfg.is_object()) args = detail::apply_config(args, cfg);
            else throw DomainError("config must be a JSON object or array");
            break;
        }
    } catch (const Error& e) {
        err << Json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return DomainFailure;
    }

    CLI::App app{"Boundary blow-up toolkit for -Lu - (mu/delta^2) u + u^p/delta^s = 0"};
    app.name("hardy_blowup");
    app.require_subcommand(1);
    std::string config_unused;
    app.add_option("--config", config_unused, "JSON config (object of flags, or array for batch regime)");

    ParamsOpt regime_p;
    std::string batch;
    auto* regime = app.add_subcommand("regime", "threshold classification");
    regime_p.add(regime, false);
    regime->add_option("--batch", batch, "JSON array of [mu, p, s] or {mu, p, s}");

    ParamsOpt barrier_p;
    GeometryOpt barrier_g;
    WindowOpt barrier_w, verify_w;
    std::string family;
    std::optional<double> barrier_eps, verify_eps;
    double verify_mu = 0.0;
    auto* barrier = app.add_subcommand("barrier", "barrier values and residuals on a window");
    barrier->require_subcommand(0, 1);
    barrier->add_option("--family", family, "h_bar, H_bar, h_under, H_under, pure_minus, pure_plus or ko");
    barrier_p.add(barrier, false);
    barrier->add_option("--eps", barrier_eps, "correction exponent (pole position for ko)");
    barrier_g.add(barrier);
    barrier_w.add(barrier);
    auto* verify = barrier->add_subcommand("verify", "sign sweep of the four local barriers");
    verify->add_option("--mu", verify_mu, "Hardy coefficient mu")->required();
    verify->add_option("--eps", verify_eps, "correction exponent");
    verify_w.add(verify);

    ParamsOpt shoot_p;
    GeometryOpt shoot_g;
    ShootOpt shoot_o;
    auto* shoot = app.add_subcommand("shoot", "integrate the barrier ODE toward r = 0");
    shoot_p.add(shoot);
    shoot_g.add(shoot);
    shoot->add_option("--kappa", shoot_o.kappa, "initial slope -v'(rho)");
    shoot->add_option("--eta-eps", shoot_o.eta_eps, "correction exponent of eta");
    shoot->add_option("--rho", shoot_o.rho, "right endpoint");
    shoot->add_option("--r-min", shoot_o.r_min, "left target");
    shoot->add_option("--v-max", shoot_o.v_max, "blow-up threshold");
    shoot->add_option("--rtol", shoot_o.rtol);
    shoot->add_option("--atol", shoot_o.atol);
    shoot->add_option("--sample-spacing", shoot_o.spacing, "minimum log r spacing of stored samples");
    shoot->add_option("--thresholds", shoot_o.thresholds, "increasing v_max sequence for blow-up detection")
        ->delimiter(',');
    shoot->add_option("--target-eps", shoot_o.target_eps, "shoot for v(r_star) = eps");
    shoot->add_option("--r-star", shoot_o.r_star, "matching radius for --target-eps");
    shoot->add_option("--compare-kappa", shoot_o.compare_kappa, "second slope for the comparison check");
    shoot->add_option("--mode", shoot_o.mode, "comparison mode")->check(CLI::IsMember({"ivp", "bvp"}));
    shoot->add_option("--out", shoot_o.out_path, "trajectory CSV path");

    ParamsOpt sweep_p;
    GeometryOpt sweep_g;
    SweepOpt sweep_o;
    auto* sweep = app.add_subcommand("sweep", "blow-up radius over decreasing kappa");
    sweep_p.add(sweep);
    sweep_g.add(sweep);
    sweep->add_option("--kappas", sweep_o.kappas, "strictly decreasing list")->delimiter(',');
    sweep->add_option("--eta-eps", sweep_o.eta_eps);
    sweep->add_option("--rho", sweep_o.rho);
    sweep->add_option("--r-star", sweep_o.r_star, "radius where sup v is read (default rho/2)");
    sweep->add_option("--v-max", sweep_o.v_max);
    sweep->add_option("--log-r-min", sweep_o.log_r_min);
    sweep->add_option("--out", sweep_o.out_path, "CSV path (default stdout)");

    ParamsOpt solve_p;
    GeometryOpt solve_g;
    SolveOpt solve_o;
    auto* solve = app.add_subcommand("solve", "finite-difference boundary value problem");
    solve_p.add(solve);
    solve_g.add(solve);
    solve->add_option("--bc-inner", solve_o.bc_inner, "inner Dirichlet value M, or zero");
    solve->add_option("--bc-outer", solve_o.bc_outer, "outer Dirichlet value (slab)");
    solve->add_option("--delta-min", solve_o.delta_min);
    solve->add_option("--n", solve_o.n, "node count");
    solve->add_option("--tol", solve_o.tol, "residual tolerance");
    solve->add_flag("--exhaust", solve_o.exhaust, "exhaustion over --eps-list x --M-list");
    solve->add_option("--eps-list", solve_o.eps_list)->delimiter(',');
    solve->add_option("--M-list", solve_o.M_list)->delimiter(',');
    solve->add_option("--pair", solve_o.pair, "solve inside a sub/super pair")->check(CLI::IsMember({"xxl", "ml"}));
    solve->add_option("--compare-bc", solve_o.compare_bc, "second inner value for the comparison check");
    solve->add_option("--out", solve_o.out_path, "profile CSV path");

    ParamsOpt cls_p;
    std::string cls_input, cls_model = "auto";
    std::vector<double> cls_window;
    auto* classify_cmd = app.add_subcommand("classify", "fit and classify a (delta, u) profile");
    cls_p.add(classify_cmd);
    classify_cmd->add_option("--input", cls_input, "CSV of delta,u")->required();
    classify_cmd->add_option("--window", cls_window, "lo,hi")->delimiter(',');
    classify_cmd->add_option("--model", cls_model)->check(CLI::IsMember({"auto", "power", "log"}));

    std::string suite;
    bool timing = false;
    auto* reproduce = app.add_subcommand("reproduce", "run an acceptance suite");
    reproduce->add_option("--suite", suite, "thresholds, ode_lemma, xxl_slab, exhaustion or all")->required();
    reproduce->add_flag("--timing", timing, "include wall times in the report");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return Usage;
    }

    try {
        if (regime->parsed()) {
            if (batch.empty() && !cfg_array && (regime->count("--mu") == 0 || regime->count("--p") == 0 ||
                                                regime->count("--s") == 0)) {
                err << "regime needs --mu, --p, --s or --batch\n";
                return Usage;
            }
            return run_regime(regime_p, batch, cfg_array ? &*cfg_array : nullptr, out);
        }
        if (cfg_array) {
            err << "array configs are only supported by regime\n";
            return Usage;
        }
        if (verify->parsed()) return run_barrier_verify(verify_mu, verify_eps, verify_w, out);
        if (barrier->parsed()) {
            if (family.empty() || barrier->count("--mu") == 0 || barrier->count("--p") == 0 ||
                barrier->count("--s") == 0) {
                err << "barrier needs --family, --mu, --p, --s\n";
                return Usage;
            }
            return run_barrier(family, barrier_p, barrier_eps, barrier_g, barrier_w, out);
        }
        if (shoot->parsed()) return run_shoot(shoot_p, shoot_g, shoot_o, out);
        if (sweep->parsed()) return run_sweep(sweep_p, sweep_g, sweep_o, out);
        if (solve->parsed()) return run_solve(solve_p, solve_g, solve_o, out);
        if (classify_cmd->parsed()) return run_classify(cls_p, cls_input, cls_window, cls_model, out);
        if (reproduce->parsed()) return run_reproduce(suite, timing, out);
    } catch (const Error& e) {
        err << Json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return DomainFailure;
    } catch (const std::invalid_argument& e) {
        err << Json{{"error", "DomainError"}, {"message", std::string("bad number: ") + e.what()}}.dump() << "\n";
        return DomainFailure;
    }
    err << "no subcommand\n";
    return Usage;
}

} // namespace hardy::cli
