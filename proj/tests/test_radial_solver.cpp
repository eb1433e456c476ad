#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardy_blowup/radial_solver.hpp"

using namespace hardy;

namespace {

Grid uniform_grid(double lo, std::size_t n) {
    Grid g;
    g.delta_min = lo;
    g.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.nodes[i] = lo + (1.0 - lo) * double(i) / double(n - 1);
    g.nodes.back() = 1.0;
    return g;
}

} // namespace

TEST_CASE("grid construction", "[radial]") {
    const auto g = Grid::geometric(1e-6, 2000);
    CHECK(g.nodes.front() == 1e-6);
    CHECK(g.nodes.back() == 1.0);
    CHECK(g.max_spacing_ratio() < 1.01);
    const auto r = g.refined();
    CHECK(r.n() == 2 * g.n() - 1);
    CHECK(r.nodes[2] == g.nodes[1]);
    CHECK_THROWS_AS(Grid::geometric(1e-6, 20), DomainError);
    const auto c = Grid::clustered(1e-5, 1e-8, 2000);
    CHECK(c.nodes[1] - c.nodes[0] == Catch::Approx(1e-8).epsilon(1e-9));
    CHECK(c.nodes.back() == 1.0);
}

TEST_CASE("discrete Laplacian is exact on quadratics", "[radial]") {
    const ProblemParams pp(0.0, 2.0, 0.0);
    const auto grid = uniform_grid(0.01, 101);
    std::vector<double> u(grid.n());
    for (std::size_t i = 0; i < grid.n(); ++i) u[i] = grid.nodes[i] * grid.nodes[i];
    const DiscreteOperator slab(Geometry::slab(), pp, grid, InnerBC::dirichlet(u[0]), 1.0);
    const auto L = slab.minus_laplacian(u);
    CHECK(std::isnan(L.front()));
    for (std::size_t i = 1; i + 1 < grid.n(); ++i) CHECK(L[i] == Catch::Approx(-2.0).epsilon(1e-9));

    // 1 - r^2 in the unit 3-ball, delta = 1 - r: -Laplacian = 2N = 6, centre row included
    for (std::size_t i = 0; i < grid.n(); ++i) u[i] = 1.0 - (1.0 - grid.nodes[i]) * (1.0 - grid.nodes[i]);
    const DiscreteOperator ball(Geometry::ball(3), pp, grid, InnerBC::dirichlet(u[0]));
    const auto B = ball.minus_laplacian(u);
    for (std::size_t i = 1; i < grid.n(); ++i) CHECK(B[i] == Catch::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("Hardy coefficient is mu / delta^2", "[radial]") {
    const ProblemParams pp(0.2, 2.0, 0.0);
    const auto grid = Grid::geometric(1e-4, 400);
    const DiscreteOperator op(Geometry::slab(), pp, grid, InnerBC::dirichlet(0.0));
    for (std::size_t i : {std::size_t(1), std::size_t(100), std::size_t(398)}) {
        const double d = grid.nodes[i];
        CHECK(op.hardy_coefficient(i) == Catch::Approx(0.2 / (d * d)).epsilon(1e-12));
    }
}

TEST_CASE("zero boundary data", "[radial]") {
    const auto grid = Grid::geometric(1e-4, 400);
    for (double mu : {0.0, 0.2, 0.25}) {
        const auto s = solve_zero_bc(ProblemParams(mu, 2.0, 0.0), Geometry::slab(), grid);
        double mx = 0.0;
        for (double v : s.values) mx = std::max(mx, std::abs(v));
        INFO("mu=" << mu);
        CHECK(mx < 1e-8);
    }
    const auto s = solve_zero_bc(ProblemParams(1.0, 2.0, 0.0), Geometry::ball(3), grid);
    CHECK(s.values.back() > 1.0);
    CHECK(s.residual_norm < 1e-10);
    for (double v : s.values) CHECK(v >= 0.0);
}

TEST_CASE("large inner data approaches the exact slab profile", "[radial]") {
    const ProblemParams pp(0.0, 3.0, 0.0);
    const auto ex = exhaustion_solve(pp, Geometry::slab(), {1e-5}, {1e6});
    const auto& s = ex.at(0, 0);
    for (double d : {1e-3, 2e-3, 5e-3, 1e-2}) {
        const double u = *s.value_at(d);
        CHECK(std::abs(u - std::sqrt(2.0) / d) / (std::sqrt(2.0) / d) < 0.02);
    }
    CHECK(s.ko_violations == 0);
}

TEST_CASE("exhaustion is monotone in the inner data", "[radial]") {
    ExhaustionOptions eo;
    eo.n = 1500;
    const auto ex = exhaustion_solve(ProblemParams(0.0, 3.0, 0.0), Geometry::slab(), {1e-2, 1e-3}, {1e2, 1e4}, eo);
    CHECK(ex.monotone_in_M);
    for (std::size_t i = 0; i < ex.eps.size(); ++i)
        for (std::size_t k = 0; k < ex.at(i, 0).values.size(); ++k)
            CHECK(ex.at(i, 0).values[k] <= ex.at(i, 1).values[k] * (1.0 + 1e-9));
    CHECK_THROWS_AS(exhaustion_solve(ProblemParams(0.0, 3.0, 0.0), Geometry::slab(), {1e-3, 1e-2}, {1e2}),
                    DomainError);
}

TEST_CASE("sub/super pairs", "[radial]") {
    const auto grid = Grid::geometric(1e-3, 200);

    const ProblemParams xxl(0.0, 3.0, 0.0);
    const auto p = build_subsuper_pair(xxl, Geometry::slab(), grid, PairTarget::XXL);
    CHECK(p.ordered);
    CHECK(p.rho > 0.0);
    bool positive = false;
    for (std::size_t i = 0; i < grid.n(); ++i) {
        CHECK(p.sub[i] <= p.sup[i]);
        positive = positive || p.sub[i] > 0.0;
    }
    CHECK(positive);
    const auto s = solve_bracketed(xxl, Geometry::slab(), grid, p);
    for (std::size_t i = 1; i + 1 < grid.n(); ++i) {
        CHECK(s.values[i] >= p.sub[i]);
        CHECK(s.values[i] <= p.sup[i]);
    }

    const ProblemParams ml(0.25, 2.0, 1.0);
    const auto q = build_subsuper_pair(ml, Geometry::slab(), grid, PairTarget::ML);
    CHECK(q.ordered);
    CHECK(q.inner_value == Catch::Approx(std::sqrt(1e-3) * -std::log(1e-3)));

    CHECK_THROWS_AS(build_subsuper_pair(ProblemParams(0.0, 3.0, 2.0), Geometry::slab(), grid, PairTarget::XXL),
                    RegimeError);
}

TEST_CASE("discrete comparison", "[radial]") {
    const ProblemParams pp(0.0, 3.0, 0.0);
    const auto grid = Grid::geometric(1e-3, 200);
    const DiscreteOperator lo(Geometry::slab(), pp, grid, InnerBC::dirichlet(1.0));
    const DiscreteOperator hi(Geometry::slab(), pp, grid, InnerBC::dirichlet(10.0));
    const auto a = solve_bvp(lo, ko_initial_iterate(lo));
    const auto b = solve_bvp(hi, ko_initial_iterate(hi));
    CHECK(discrete_comparison_check(a, b));
    CHECK(discrete_comparison_check(as_grid_function(pp, Geometry::slab(), grid, std::vector<double>(grid.n(), 0.0)), a));
    // boundary order reversed
    CHECK_THROWS_AS(discrete_comparison_check(b, a), PreconditionError);
    const auto other = Grid::geometric(1e-3, 201);
    const DiscreteOperator oo(Geometry::slab(), pp, other, InnerBC::dirichlet(10.0));
    CHECK_THROWS_AS(discrete_comparison_check(a, solve_bvp(oo, ko_initial_iterate(oo))), PreconditionError);
}
