#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "barriers.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "regime.hpp"
#include "tridiag.hpp"

namespace hardy {

/// Nodes in delta, geometric toward delta = 0 and ending at delta_max.
struct Grid {
    std::vector<double> nodes;
    double delta_min = 0.0;

    std::size_t n() const { return nodes.size(); }

    static Grid geometric(double delta_min, std::size_t n, double delta_max = 1.0) {
        if (!(delta_min > 0.0 && delta_min < delta_max) || n < 3)
            throw DomainError("Grid: need 0 < delta_min < delta_max and n >= 3");
        Grid g;
        g.delta_min = delta_min;
        g.nodes.resize(n);
        const double la = std::log(delta_min), lb = std::log(delta_max);
        for (std::size_t i = 0; i < n; ++i)
            g.nodes[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
        g.nodes.front() = delta_min;
        g.nodes.back() = delta_max;
        if (g.max_spacing_ratio() > 1.2) throw DomainError("Grid: spacing ratio above 1.2; add nodes");
        return g;
    }

    /// Spacings grow geometrically away from delta_min, the first one being h0.
    /// Resolves the layer next to a large Dirichlet value at delta_min.
    static Grid clustered(double delta_min, double h0, std::size_t n, double delta_max = 1.0) {
        const double len = delta_max - delta_min;
        if (!(delta_min > 0.0 && len > 0.0) || n < 3 || !(h0 > 0.0) || !(h0 * (n - 1) < len))
            throw DomainError("Grid: need 0 < delta_min < delta_max, n >= 3, 0 < h0 < len/(n-1)");
        // q with h0 (q^{n-1} - 1)/(q - 1) = len, by bisection on log q
        const double m = static_cast<double>(n - 1);
        auto total = [&](double lq) { return h0 * std::expm1(m * lq) / std::expm1(lq); };
        double a = 1e-12, b = 1.0;
        while (total(b) < len) b *= 2.0;
        for (int k = 0; k < 200; ++k) {
            const double c = 0.5 * (a + b);
            (total(c) < len ? a : b) = c;
        }
        const double q = std::exp(0.5 * (a + b));
        Grid g;
        g.delta_min = delta_min;
        g.nodes.resize(n);
        double off = 0.0, h = h0;
        g.nodes[0] = delta_min;
        for (std::size_t i = 1; i < n; ++i, h *= q) {
            off += h;
            g.nodes[i] = delta_min + off;
        }
        g.nodes.back() = delta_max;
        if (g.max_spacing_ratio() > 1.2) throw DomainError("Grid: spacing ratio above 1.2; add nodes");
        return g;
    }

    /// Every old node kept, one new node between each pair (log-midpoint).
    Grid refined() const {
        Grid g;
        g.delta_min = delta_min;
        g.nodes.reserve(2 * n() - 1);
        for (std::size_t i = 0; i + 1 < n(); ++i) {
            g.nodes.push_back(nodes[i]);
            g.nodes.push_back(std::sqrt(nodes[i] * nodes[i + 1]));
        }
        g.nodes.push_back(nodes.back());
        return g;
    }

    double max_spacing_ratio() const {
        double m = 1.0;
        for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
            m = std::max(m, (nodes[i + 1] - nodes[i]) / (nodes[i] - nodes[i - 1]));
        return m;
    }
};

/// Boundary data at delta_min: a plain Dirichlet value, or the exhaustion
/// proxy u = M on {delta = eps} for the "u = +infinity" problem.
struct InnerBC {
    enum class Kind { DirichletValue, Exhausted };
    Kind kind = Kind::DirichletValue;
    double eps = 0.0;
    double M = 0.0;

    static InnerBC dirichlet(double M) { return {Kind::DirichletValue, 0.0, M}; }
    static InnerBC exhausted(double eps, double M) { return {Kind::Exhausted, eps, M}; }
};

/// Finite differences for
///   -u'' + (N-1)/(1-delta) u' - (mu/delta^2) u + u_+^p / delta^s
/// (drift only in the ball). Row 0 is the inner Dirichlet row; the last row
/// is the outer Dirichlet row (slab) or the symmetric centre row (ball).
class DiscreteOperator {
public:
    DiscreteOperator(Geometry geom, ProblemParams pp, Grid grid, InnerBC inner, double bc_outer = 0.0)
        : geom_(geom), pp_(pp), grid_(std::move(grid)), inner_(inner), bc_outer_(bc_outer) {
        const auto& x = grid_.nodes;
        const std::size_t n = x.size();
        if (n < 3) throw DomainError("DiscreteOperator: grid too small");
        if (x.back() != 1.0) throw DomainError("DiscreteOperator: grid must end at delta = 1");
        if (!(inner.M >= 0.0) || !(bc_outer >= 0.0) || !std::isfinite(inner.M) || !std::isfinite(bc_outer))
            throw DomainError("DiscreteOperator: boundary values must be finite and nonnegative");
        if (inner.kind == InnerBC::Kind::Exhausted && std::abs(inner.eps - x.front()) > 1e-12 * inner.eps)
            throw DomainError("DiscreteOperator: exhausted grids start at eps");
        lo_.assign(n, 0.0);
        di_.assign(n, 0.0);
        up_.assign(n, 0.0);
        hardy_.assign(n, 0.0);
        weight_.assign(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
            lo_[i] = -2.0 / (hm * (hm + hp));
            up_[i] = -2.0 / (hp * (hm + hp));
            di_[i] = 2.0 / (hm * hp);
            if (geom_.is_ball()) {
                const double c = (geom_.dim - 1) / (1.0 - x[i]);
                lo_[i] += c * (-hp / (hm * (hm + hp)));
                up_[i] += c * (hm / (hp * (hm + hp)));
                di_[i] += c * ((hp - hm) / (hm * hp));
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            hardy_[i] = pp_.mu / (x[i] * x[i]);
            weight_[i] = std::pow(x[i], -pp_.s);
        }
        if (geom_.is_ball()) {
            const double h = x[n - 1] - x[n - 2];
            lo_[n - 1] = -2.0 * geom_.dim / (h * h);
            di_[n - 1] = 2.0 * geom_.dim / (h * h);
        }
    }

    const Geometry& geometry() const { return geom_; }
    const ProblemParams& params() const { return pp_; }
    const Grid& grid() const { return grid_; }
    const InnerBC& inner() const { return inner_; }
    double bc_outer() const { return bc_outer_; }
    std::size_t n() const { return grid_.n(); }
    bool outer_is_dirichlet() const { return !geom_.is_ball(); }
    bool is_dirichlet_row(std::size_t i) const { return i == 0 || (i + 1 == n() && outer_is_dirichlet()); }

    /// mu / delta_i^2
    double hardy_coefficient(std::size_t i) const { return hardy_[i]; }

    /// -Delta_h u at the non-Dirichlet rows (NaN at Dirichlet rows).
    std::vector<double> minus_laplacian(const std::vector<double>& u) const {
        std::vector<double> out(n(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < n(); ++i) {
            if (is_dirichlet_row(i)) continue;
            out[i] = lo_[i] * u[i - 1] + di_[i] * u[i] + (i + 1 < n() ? up_[i] * u[i + 1] : 0.0);
        }
        return out;
    }

    /// Equation residual at non-Dirichlet rows, boundary mismatch at Dirichlet rows.
    std::vector<double> residual(const std::vector<double>& u) const {
        std::vector<double> F(n());
        for (std::size_t i = 0; i < n(); ++i) {
            if (i == 0) {
                F[i] = u[0] - inner_.M;
            } else if (is_dirichlet_row(i)) {
                F[i] = u[i] - bc_outer_;
            } else {
                const double up = i + 1 < n() ? up_[i] * u[i + 1] : 0.0;
                F[i] = lo_[i] * u[i - 1] + di_[i] * u[i] + up - hardy_[i] * u[i] + nonlinear(i, u[i]);
            }
        }
        return F;
    }

    /// Magnitude of the terms making up each residual row.
    std::vector<double> row_scale(const std::vector<double>& u) const {
        std::vector<double> S(n());
        for (std::size_t i = 0; i < n(); ++i) {
            if (i == 0) {
                S[i] = std::abs(inner_.M) + std::abs(u[0]);
            } else if (is_dirichlet_row(i)) {
                S[i] = std::abs(bc_outer_) + std::abs(u[i]);
            } else {
                const double up = i + 1 < n() ? std::abs(up_[i] * u[i + 1]) : 0.0;
                S[i] = std::abs(lo_[i] * u[i - 1]) + std::abs(di_[i] * u[i]) + up +
                       std::abs(hardy_[i] * u[i]) + nonlinear(i, u[i]);
            }
        }
        return S;
    }

    /// max_i |F_i| / (sum of |terms of row i|): scale-free across the boundary layer.
    double residual_norm(const std::vector<double>& u) const {
        const auto F = residual(u);
        const auto S = row_scale(u);
        double m = 0.0;
        for (std::size_t i = 0; i < n(); ++i) m = std::max(m, std::abs(F[i]) / (S[i] + 1e-300));
        return m;
    }

    /// Tridiagonal Jacobian of residual() at u.
    void jacobian(const std::vector<double>& u, std::vector<double>& lo, std::vector<double>& di,
                  std::vector<double>& up) const {
        lo.assign(n(), 0.0);
        di.assign(n(), 0.0);
        up.assign(n(), 0.0);
        for (std::size_t i = 0; i < n(); ++i) {
            if (is_dirichlet_row(i)) {
                di[i] = 1.0;
                continue;
            }
            lo[i] = lo_[i];
            up[i] = up_[i];
            di[i] = di_[i] - hardy_[i] + nonlinear_derivative(i, u[i]);
        }
    }

    /// Linear part with an extra diagonal shift, for the monotone iteration.
    void shifted_linear(const std::vector<double>& shift, std::vector<double>& lo, std::vector<double>& di,
                        std::vector<double>& up) const {
        lo.assign(n(), 0.0);
        di.assign(n(), 0.0);
        up.assign(n(), 0.0);
        for (std::size_t i = 0; i < n(); ++i) {
            if (is_dirichlet_row(i)) {
                di[i] = 1.0;
                continue;
            }
            lo[i] = lo_[i];
            up[i] = up_[i];
            di[i] = di_[i] - hardy_[i] + shift[i];
        }
    }

    double nonlinear(std::size_t i, double ui) const { return ui > 0.0 ? std::pow(ui, pp_.p) * weight_[i] : 0.0; }
    double nonlinear_derivative(std::size_t i, double ui) const {
        return ui > 0.0 ? pp_.p * std::pow(ui, pp_.p - 1.0) * weight_[i] : 0.0;
    }

    /// Boundary values written into a vector.
    void impose_boundary(std::vector<double>& u) const {
        u[0] = inner_.M;
        if (outer_is_dirichlet()) u.back() = bc_outer_;
    }

private:
    Geometry geom_;
    ProblemParams pp_;
    Grid grid_;
    InnerBC inner_;
    double bc_outer_;
    std::vector<double> lo_, di_, up_, hardy_, weight_;
};

struct GridSolution {
    Geometry geometry;
    ProblemParams params;
    Grid grid;
    std::vector<double> values;
    InnerBC bc_inner;
    double bc_outer = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    /// "newton", or "newton+monotone" when the monotone fallback ran
    std::string bracket_used = "newton";
    // Keller-Osserman post-check
    double ko_gamma = 0.0;
    double ko_pole = 0.0;
    std::size_t ko_violations = 0;
    double ko_max_ratio = 0.0;

    /// Four-point Lagrange interpolation in log delta (linear when the grid
    /// has fewer nodes); nullopt outside the grid.
    std::optional<double> value_at(double delta) const {
        const auto& x = grid.nodes;
        if (x.empty() || delta < x.front() || delta > x.back()) return std::nullopt;
        auto it = std::lower_bound(x.begin(), x.end(), delta);
        if (*it == delta) return values[static_cast<std::size_t>(it - x.begin())];
        const std::size_t j = static_cast<std::size_t>(it - x.begin());
        const double t = std::log(delta);
        if (x.size() < 4) {
            const double w = (t - std::log(x[j - 1])) / (std::log(x[j]) - std::log(x[j - 1]));
            return values[j - 1] + w * (values[j] - values[j - 1]);
        }
        const std::size_t k0 = std::min(j >= 2 ? j - 2 : 0, x.size() - 4);
        double acc = 0.0;
        for (std::size_t a = k0; a < k0 + 4; ++a) {
            double w = 1.0;
            for (std::size_t b = k0; b < k0 + 4; ++b)
                if (b != a) w *= (t - std::log(x[b])) / (std::log(x[a]) - std::log(x[b]));
            acc += w * values[a];
        }
        return acc;
    }
};

inline DistanceModel distance_model(const Geometry& g) {
    return g.is_ball() ? DistanceModel::BallSmooth : DistanceModel::Slab;
}

/// KO super-solution of the geometry with its pole at `pole`.
inline BarrierSpec ko_bound(const ProblemParams& pp, const Geometry& g, double pole) {
    return ko_supersolution(pp, pole, distance_model(g), g.dim);
}

/// Records gamma_* and counts nodes where u exceeds the KO super-solution.
/// The pole sits at the inner boundary for positive boundary data (the
/// exhaustion proxy) and at delta = 0 otherwise.
inline void annotate_ko(GridSolution& s) {
    const double pole = s.bc_inner.M > 0.0 ? s.grid.delta_min : 0.0;
    const auto spec = ko_bound(s.params, s.geometry, pole);
    s.ko_gamma = spec.gamma;
    s.ko_pole = pole;
    s.ko_violations = 0;
    s.ko_max_ratio = 0.0;
    for (std::size_t i = 0; i < s.grid.n(); ++i) {
        const double d = s.grid.nodes[i];
        if (!(d > pole)) continue;
        const double bound = eval_barrier(spec, d);
        const double ratio = s.values[i] / bound;
        s.ko_max_ratio = std::max(s.ko_max_ratio, ratio);
        if (ratio > 1.0 + 1e-9) ++s.ko_violations;
    }
}

struct SolveOptions {
    double tol = 1e-10;
    int max_iterations = 200;
    int monotone_sweeps = 50;
    /// optional bracket; iterates are clamped into [lower, upper]
    const std::vector<double>* lower = nullptr;
    const std::vector<double>* upper = nullptr;
};

namespace detail {

inline void clamp_into(std::vector<double>& u, const SolveOptions& o) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        double v = std::max(u[i], 0.0);
        if (o.lower) v = std::max(v, (*o.lower)[i]);
        if (o.upper) v = std::min(v, (*o.upper)[i]);
        u[i] = v;
    }
}

} // namespace detail

/// Damped Newton on the discrete residual, iterates clamped at zero (and into
/// the bracket when given). When the line search cannot reduce the residual,
/// a few sweeps of the monotone iteration
///   (A + lambda) u_{k+1} = lambda u_k - u_k^p / delta^s,  lambda_i = p u_i^{p-1} / delta_i^s
/// are taken before Newton resumes.
inline GridSolution solve_bvp(const DiscreteOperator& op, std::vector<double> u, const SolveOptions& o = {}) {
    const std::size_t n = op.n();
    if (u.size() != n) throw DomainError("solve_bvp: initial iterate has wrong size");
    for (double v : u)
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("solve_bvp: initial iterate must be nonnegative");
    op.impose_boundary(u);
    detail::clamp_into(u, o);
    op.impose_boundary(u);

    GridSolution sol;
    sol.geometry = op.geometry();
    sol.params = op.params();
    sol.grid = op.grid();
    sol.bc_inner = op.inner();
    sol.bc_outer = op.bc_outer();

    std::vector<double> lo, di, up, trial(n);
    double nr = op.residual_norm(u);
    int it = 0;
    for (; it < o.max_iterations && !(nr <= o.tol); ++it) {
        const auto F = op.residual(u);
        op.jacobian(u, lo, di, up);
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -F[i];
        std::vector<double> du;
        bool stepped = false;
        try {
            du = solve_tridiagonal(lo, di, up, rhs);
            double lam = 1.0;
            for (int k = 0; k <= 30; ++k, lam *= 0.5) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + lam * du[i];
                detail::clamp_into(trial, o);
                op.impose_boundary(trial);
                const double tn = op.residual_norm(trial);
                if (tn < nr) {
                    u.swap(trial);
                    nr = tn;
                    stepped = true;
                    break;
                }
            }
        } catch (const NonConvergence&) {
        }
        if (stepped) continue;

        sol.bracket_used = "newton+monotone";
        const double before = nr;
        for (int k = 0; k < o.monotone_sweeps; ++k) {
            std::vector<double> lam(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                lam[i] = op.nonlinear_derivative(i, u[i]);
                b[i] = lam[i] * u[i] - op.nonlinear(i, u[i]);
            }
            op.shifted_linear(lam, lo, di, up);
            b[0] = op.inner().M;
            if (op.outer_is_dirichlet()) b[n - 1] = op.bc_outer();
            u = solve_tridiagonal(lo, di, up, b);
            detail::clamp_into(u, o);
            op.impose_boundary(u);
        }
        nr = op.residual_norm(u);
        if (!(nr < before)) break;
    }
    sol.values = std::move(u);
    sol.residual_norm = nr;
    sol.iterations = it;
    if (!(nr <= o.tol))
        throw NonConvergence("solve_bvp: residual " + std::to_string(nr) + " after " + std::to_string(it) +
                             " iterations");
    annotate_ko(sol);
    return sol;
}

/// KO super-solution sampled on the grid, used as the Newton start. With
/// boundary data M > 0 the pole is moved just below delta_min so the profile
/// equals M there; with zero data it sits at delta = 0.
inline std::vector<double> ko_initial_iterate(const DiscreteOperator& op) {
    const auto& g = op.grid();
    const auto& pp = op.params();
    const bool ball = op.geometry().is_ball();
    auto dist = [&](double d) { return ball ? d * (2.0 - d) / 2.0 : d; };
    auto inv = [&](double d) { return ball ? 1.0 - std::sqrt(1.0 - 2.0 * d) : d; };
    const double eps = g.delta_min;
    const double M = op.inner().M;
    double pole = 0.0;
    BarrierSpec spec = ko_bound(pp, op.geometry(), 0.0);
    if (M > 0.0) {
        for (int rep = 0; rep < 2; ++rep) {
            const double de = dist(eps);
            const double gap = std::pow(spec.gamma * std::pow(de, spec.ko_a) / M, 1.0 / spec.ko_c);
            pole = gap < de ? inv(de - gap) : 0.0;
            spec = ko_bound(pp, op.geometry(), pole);
        }
    }
    std::vector<double> u(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) u[i] = eval_barrier(spec, g.nodes[i]);
    op.impose_boundary(u);
    return u;
}

/// Solution with zero boundary data started from the KO super-solution, so
/// Newton descends to the maximal solution below it (nontrivial when mu > 1/4).
inline GridSolution solve_zero_bc(const ProblemParams& pp, const Geometry& g, const Grid& grid,
                                  const SolveOptions& o = {}) {
    DiscreteOperator op(g, pp, grid, InnerBC::dirichlet(0.0), 0.0);
    return solve_bvp(op, ko_initial_iterate(op), o);
}

// ---------------------------------------------------------------------------
// Sub/super-solution pairs

enum class PairTarget { XXL, ML };

struct SubSuperPair {
    std::vector<double> sub;
    std::vector<double> sup;
    bool ordered = false;
    PairTarget target = PairTarget::XXL;
    double rho = 0.0;       // support of the sub-solution is (0, rho)
    double sub_gamma = 0.0; // XXL amplitude
    double tau_star = 0.0;  // ML multiplier of the large super-harmonic
    /// suggested inner Dirichlet value between sub and sup
    double inner_value = 0.0;
};

namespace detail {

/// Interior rows where the discrete residual of u is positive beyond rounding.
inline bool is_discrete_subsolution(const DiscreteOperator& op, const std::vector<double>& u) {
    const auto F = op.residual(u);
    const auto S = op.row_scale(u);
    for (std::size_t i = 0; i < op.n(); ++i)
        if (!op.is_dirichlet_row(i) && F[i] > 1e-9 * S[i]) return false;
    return true;
}

inline bool is_discrete_supersolution(const DiscreteOperator& op, const std::vector<double>& u) {
    const auto F = op.residual(u);
    const auto S = op.row_scale(u);
    for (std::size_t i = 0; i < op.n(); ++i)
        if (!op.is_dirichlet_row(i) && F[i] < -1e-9 * S[i]) return false;
    return true;
}

} // namespace detail

/// Sub/super pair on the grid. XXL: sub = gamma (d^b - kappa d^{1/2} L^{1/2})_+,
/// sup = KO super-solution. ML: sub = d^{beta_-} - kappa d^alpha (log variant at
/// mu = 1/4), sup = min(tau H_bar, KO_R). rho and gamma are reduced until the
/// nodewise discrete residual of the sub is nonpositive.
inline SubSuperPair build_subsuper_pair(const ProblemParams& pp, const Geometry& g, const Grid& grid,
                                        PairTarget target) {
    const auto rep = existence_verdict(pp);
    if (rep.verdict != Verdict::Existence)
        throw RegimeError("build_subsuper_pair: parameters are not in the existence regime");
    const auto& x = grid.nodes;
    const std::size_t n = x.size();
    const double bm = rep.roots->beta_minus;
    const double b = pp.ko_exponent();
    const bool degenerate = rep.roots->degenerate;
    const auto ko = ko_bound(pp, g, 0.0);

    SubSuperPair pr;
    pr.target = target;
    pr.sup.resize(n);
    pr.sub.assign(n, 0.0);

    if (target == PairTarget::XXL) {
        for (std::size_t i = 0; i < n; ++i) pr.sup[i] = eval_barrier(ko, x[i]);
        pr.inner_value = pr.sup[0];
        DiscreteOperator op(g, pp, grid, InnerBC::dirichlet(pr.inner_value), 0.0);
        for (double rho = 0.25; rho > 10.0 * x[0]; rho *= 0.5) {
            const double Lr = -std::log(rho);
            const double kappa = std::pow(rho, b) / (std::sqrt(rho) * std::sqrt(Lr));
            for (double gam = ko.gamma; gam > 1e-8 * ko.gamma; gam *= 0.5) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = x[i];
                    pr.sub[i] = d < rho ? std::max(0.0, gam * (std::pow(d, b) - kappa * std::sqrt(d * -std::log(d))))
                                        : 0.0;
                }
                auto probe = pr.sub;
                probe[0] = pr.inner_value;
                bool ordered = true;
                for (std::size_t i = 0; i < n; ++i) ordered = ordered && pr.sub[i] <= pr.sup[i];
                if (ordered && detail::is_discrete_subsolution(op, pr.sub)) {
                    pr.rho = rho;
                    pr.sub_gamma = gam;
                    pr.ordered = true;
                    return pr;
                }
            }
        }
        throw PreconditionError("build_subsuper_pair: no admissible XXL sub-solution on this grid");
    }

    // ML
    const double eps_bar = degenerate ? 0.5 : default_barrier_epsilon(pp.mu);
    const BarrierSpec Hbar = degenerate ? log_corrected(1.0, eps_bar, Correction::Plus, Role::SuperHarmonic)
                                        : power_corrected(bm, eps_bar, Correction::Plus, Role::SuperHarmonic,
                                                          Anchor::BetaMinus);
    const double alpha = degenerate ? 0.5
                                    : 0.5 * (bm + std::min({bm * pp.p + 2.0 - pp.s, bm + 1.0, rep.roots->beta_plus}));
    auto harmonic = [&](double d) { return degenerate ? std::sqrt(d) * -std::log(d) : std::pow(d, bm); };
    for (double rho = degenerate ? 0.25 : 0.5; rho > 10.0 * x[0]; rho *= 0.5) {
        double kappa;
        if (degenerate) kappa = std::pow(-std::log(rho), 1.0 - alpha);
        else kappa = std::pow(rho, bm - alpha);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i];
            if (d >= rho) {
                pr.sub[i] = 0.0;
            } else if (degenerate) {
                const double L = -std::log(d);
                pr.sub[i] = std::max(0.0, std::sqrt(d) * (L - kappa * std::pow(L, alpha)));
            } else {
                pr.sub[i] = std::max(0.0, std::pow(d, bm) - kappa * std::pow(d, alpha));
            }
        }
        // super-solution: min(tau H_bar, KO with pole at R = rho/2)
        const double R = rho / 2.0;
        const auto koR = ko_bound(pp, g, R);
        const double tau = std::max(1.0, 2.0 * eval_barrier(koR, rho) / eval_barrier(Hbar, rho));
        bool hbar_ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i];
            double h = std::numeric_limits<double>::infinity();
            if (!degenerate || d < 1.0 / std::exp(1.0)) {
                if (linear_residual(Hbar, pp, d) < 0.0 && d < rho) hbar_ok = false;
                h = tau * eval_barrier(Hbar, d);
            }
            const double k = d > R ? eval_barrier(koR, d) : std::numeric_limits<double>::infinity();
            pr.sup[i] = std::min(h, k);
        }
        if (!hbar_ok) continue;
        pr.inner_value = harmonic(x[0]);
        DiscreteOperator op(g, pp, grid, InnerBC::dirichlet(pr.inner_value), 0.0);
        bool ordered = true;
        for (std::size_t i = 0; i < n; ++i) ordered = ordered && pr.sub[i] <= pr.sup[i];
        if (ordered && pr.inner_value <= pr.sup[0] && pr.inner_value >= pr.sub[0] &&
            detail::is_discrete_subsolution(op, pr.sub)) {
            pr.rho = rho;
            pr.tau_star = tau;
            pr.ordered = true;
            return pr;
        }
    }
    throw PreconditionError("build_subsuper_pair: no admissible ML sub-solution on this grid");
}

/// Solves with the pair as a clamp, starting from the super-solution.
inline GridSolution solve_bracketed(const ProblemParams& pp, const Geometry& g, const Grid& grid,
                                    const SubSuperPair& pr, SolveOptions o = {}) {
    DiscreteOperator op(g, pp, grid, InnerBC::dirichlet(pr.inner_value), 0.0);
    auto upper = pr.sup;
    op.impose_boundary(upper);
    auto lower = pr.sub;
    op.impose_boundary(lower);
    o.lower = &lower;
    o.upper = &upper;
    return solve_bvp(op, upper, o);
}

/// Discrete comparison: with sub and sup verified as discrete sub- and
/// super-solutions and ordered on the boundary, reports whether sub <= sup
/// at every node.
inline bool discrete_comparison_check(const GridSolution& sub, const GridSolution& sup) {
    if (!(sub.params == sup.params) || sub.grid.nodes != sup.grid.nodes || sub.geometry.kind != sup.geometry.kind ||
        sub.geometry.dim != sup.geometry.dim)
        throw PreconditionError("discrete_comparison_check: different problems");
    const std::size_t n = sub.grid.n();
    DiscreteOperator op(sub.geometry, sub.params, sub.grid, InnerBC::dirichlet(0.0), 0.0);
    if (!detail::is_discrete_subsolution(op, sub.values))
        throw PreconditionError("discrete_comparison_check: sub has a positive residual");
    if (!detail::is_discrete_supersolution(op, sup.values))
        throw PreconditionError("discrete_comparison_check: sup has a negative residual");
    if (sub.values[0] > sup.values[0] || (op.outer_is_dirichlet() && sub.values[n - 1] > sup.values[n - 1]))
        throw PreconditionError("discrete_comparison_check: boundary values are not ordered");
    for (std::size_t i = 0; i < n; ++i)
        if (sub.values[i] > sup.values[i] * (1.0 + 1e-12) + 1e-300) return false;
    return true;
}

/// Wraps a nodal vector as a GridSolution (no solve), for comparisons.
inline GridSolution as_grid_function(const ProblemParams& pp, const Geometry& g, const Grid& grid,
                                     std::vector<double> values) {
    GridSolution s;
    s.geometry = g;
    s.params = pp;
    s.grid = grid;
    s.values = std::move(values);
    s.bc_inner = InnerBC::dirichlet(s.values.front());
    s.bc_outer = s.values.back();
    return s;
}

// ---------------------------------------------------------------------------
// Exhaustion

struct ExhaustionOptions {
    std::size_t n = 4000;
    double tol = 1e-10;
    /// multiply each M by max(1, gamma_* eps^b) so the proxy is large relative
    /// to the KO profile at the inner boundary
    bool scale_M_by_ko = true;
    /// compact set where M- and eps-monotonicity are asserted
    double compact_lo = 0.1;
    double compact_hi = 0.9;
    /// Cauchy-in-M acceptance on the compact set
    double cauchy_tol = 1e-3;
    /// reference point for the collapse test
    double reference_delta = 0.5;
    /// decay rate of u(reference) in eps above which the limit is trivial
    double trivial_rate = 0.05;
    /// extrapolation agreement required for the limit profile, also the
    /// slack of its KO check
    double limit_tol = 1e-2;
};

/// eps -> 0 limit. Polynomial extrapolation in eps of the largest-M solutions,
/// sampled on the finest grid. Kept only where dropping the coarsest eps
/// changes the extrapolant by at most limit_tol (relative). When u at the
/// reference point decays like a positive power of eps the limit is trivial.
struct LimitProfile {
    std::vector<double> delta;
    std::vector<double> u;
    std::vector<double> error;
    bool trivial = false;
    double valid_from = 0.0;
    std::vector<double> decay_rates;
    double ko_gamma = 0.0;
    std::size_t ko_violations = 0;
};

struct ExhaustionResult {
    std::vector<double> eps;
    std::vector<double> M;           // as requested
    std::vector<double> M_effective; // per eps, after KO scaling (eps-major)
    std::vector<GridSolution> solutions; // eps-major, M-minor
    bool monotone_in_M = true;
    bool cauchy_in_M = true;
    double cauchy_gap = 0.0;
    bool monotone_in_eps = true;
    LimitProfile limit;

    const GridSolution& at(std::size_t i_eps, std::size_t j_M) const { return solutions[i_eps * M.size() + j_M]; }
};

inline ExhaustionResult exhaustion_solve(const ProblemParams& pp, const Geometry& g,
                                         const std::vector<double>& eps_seq, const std::vector<double>& M_seq,
                                         const ExhaustionOptions& eo = {}) {
    if (eps_seq.empty() || M_seq.empty()) throw DomainError("exhaustion_solve: empty sequences");
    for (std::size_t i = 1; i < eps_seq.size(); ++i)
        if (!(eps_seq[i] < eps_seq[i - 1])) throw DomainError("exhaustion_solve: eps must decrease");
    for (std::size_t j = 1; j < M_seq.size(); ++j)
        if (!(M_seq[j] > M_seq[j - 1])) throw DomainError("exhaustion_solve: M must increase");
    ExhaustionResult res;
    res.eps = eps_seq;
    res.M = M_seq;
    const auto ko0 = ko_bound(pp, g, 0.0);
    const std::size_t ne = eps_seq.size(), nm = M_seq.size();
    for (double e : eps_seq)
        for (double M : M_seq)
            res.M_effective.push_back(eo.scale_M_by_ko ? M * std::max(1.0, eval_barrier(ko0, e)) : M);

    res.solutions = parallel_map(ne * nm, [&](std::size_t k) {
        const double e = eps_seq[k / nm];
        // One grid per eps so the M-family compares nodewise. First spacing:
        // a quarter of the width over which the KO profile drops from the
        // largest M to O(1) relative, capped at eps.
        const double Mtop = res.M_effective[(k / nm) * nm + nm - 1];
        const double w = std::pow(ko0.gamma * std::pow(e, ko0.ko_a) / Mtop, 1.0 / ko0.ko_c);
        const auto grid = Grid::clustered(e, 0.25 * std::min(w, e), eo.n);
        DiscreteOperator op(g, pp, grid, InnerBC::exhausted(e, res.M_effective[k]), 0.0);
        SolveOptions so;
        so.tol = eo.tol;
        return solve_bvp(op, ko_initial_iterate(op), so);
    });

    auto on_compact = [&](double d) { return d >= eo.compact_lo && d <= eo.compact_hi; };
    for (std::size_t i = 0; i < ne; ++i) {
        for (std::size_t j = 0; j + 1 < nm; ++j) {
            const auto& a = res.at(i, j).values;
            const auto& b = res.at(i, j + 1).values;
            for (std::size_t k = 0; k < a.size(); ++k)
                if (a[k] > b[k] * (1.0 + 1e-9) + 1e-300) res.monotone_in_M = false;
        }
        if (nm >= 2) {
            const auto& s1 = res.at(i, nm - 2);
            const auto& s2 = res.at(i, nm - 1);
            for (std::size_t k = 0; k < s1.grid.n(); ++k) {
                if (!on_compact(s1.grid.nodes[k])) continue;
                const double gap = std::abs(s2.values[k] - s1.values[k]) / std::max(s2.values[k], 1e-300);
                res.cauchy_gap = std::max(res.cauchy_gap, s2.values[k] == 0.0 ? 0.0 : gap);
            }
        }
    }
    res.cauchy_in_M = res.cauchy_gap <= eo.cauchy_tol;
    for (std::size_t i = 0; i + 1 < ne; ++i) {
        const auto& coarse = res.at(i, nm - 1);
        const auto& fine = res.at(i + 1, nm - 1);
        for (std::size_t k = 0; k < fine.grid.n(); ++k) {
            const double d = fine.grid.nodes[k];
            if (!on_compact(d)) continue;
            if (fine.values[k] > *coarse.value_at(d) * (1.0 + 1e-6) + 1e-300) res.monotone_in_eps = false;
        }
    }

    // limit profile
    LimitProfile& lim = res.limit;
    for (std::size_t i = 0; i + 1 < ne; ++i) {
        const double a = *res.at(i, nm - 1).value_at(eo.reference_delta);
        const double b = *res.at(i + 1, nm - 1).value_at(eo.reference_delta);
        lim.decay_rates.push_back((a > 0.0 && b > 0.0) ? std::log(a / b) / std::log(eps_seq[i] / eps_seq[i + 1])
                                                        : std::numeric_limits<double>::infinity());
    }
    lim.trivial = !lim.decay_rates.empty() && lim.decay_rates.back() >= eo.trivial_rate;
    const auto& finest = res.at(ne - 1, nm - 1);
    const auto lim_ko = ko_bound(pp, g, 0.0);
    lim.ko_gamma = lim_ko.gamma;
    // extrapolation through eps[first..ne-1] evaluated at d
    auto extrapolate = [&](std::size_t first, double d) {
        double U = 0.0;
        for (std::size_t i = first; i < ne; ++i) {
            double w = 1.0;
            for (std::size_t j = first; j < ne; ++j)
                if (j != i) w *= eps_seq[j] / (eps_seq[j] - eps_seq[i]);
            U += w * *res.at(i, nm - 1).value_at(d);
        }
        return U;
    };
    std::vector<double> ds, us, errs;
    for (std::size_t k = 0; k < finest.grid.n(); ++k) {
        const double d = finest.grid.nodes[k];
        if (d < 2.0 * eps_seq.front()) continue;
        const double U = lim.trivial ? 0.0 : extrapolate(0, d);
        const double U2 = lim.trivial || ne < 2 ? U : extrapolate(1, d);
        ds.push_back(d);
        us.push_back(std::max(U, 0.0));
        errs.push_back(std::abs(U - U2));
    }
    // keep the outer run where the two extrapolants agree
    std::size_t first = ds.size();
    while (first > 0 && errs[first - 1] <= eo.limit_tol * std::abs(us[first - 1])) --first;
    lim.delta.assign(ds.begin() + static_cast<std::ptrdiff_t>(first), ds.end());
    lim.u.assign(us.begin() + static_cast<std::ptrdiff_t>(first), us.end());
    lim.error.assign(errs.begin() + static_cast<std::ptrdiff_t>(first), errs.end());
    lim.valid_from = lim.delta.empty() ? 1.0 : lim.delta.front();
    for (std::size_t k = 0; k < lim.delta.size(); ++k)
        if (lim.u[k] > eval_barrier(lim_ko, lim.delta[k]) * (1.0 + eo.limit_tol)) ++lim.ko_violations;
    return res;
}

} // namespace hardy
