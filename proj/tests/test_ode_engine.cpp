#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardy_blowup/ode_engine.hpp"

using namespace hardy;

TEST_CASE("blow-up exactly in the nonexistence range", "[ode]") {
    struct Case {
        ProblemParams pp;
        Terminal expected;
    };
    const Case cases[] = {
        {ProblemParams(0.0, 3.0, 3.0), Terminal::BlowUp},
        {ProblemParams(0.0, 3.0, 0.0), Terminal::ReachedRMin},
        {ProblemParams(-1.0, 2.0, 0.5), Terminal::ReachedRMin},
        {ProblemParams(-1.0, 2.0, 1.5), Terminal::BlowUp},
        {ProblemParams(0.25, 1.5, 2.0), Terminal::ReachedRMin},
        {ProblemParams(0.25, 1.5, 2.5), Terminal::BlowUp},
    };
    for (const auto& c : cases) {
        INFO("mu=" << c.pp.mu << " p=" << c.pp.p << " s=" << c.pp.s);
        const auto tr = integrate_left(make_ode_problem(c.pp, 1.0), 1e-6, 1e8);
        CHECK(tr.terminal == c.expected);
        CHECK(tr.monotone());
    }
}

TEST_CASE("blow-up radius is stable under tolerance halving", "[ode]") {
    const auto pb = make_ode_problem(ProblemParams(0.0, 3.0, 3.0), 1.0);
    const auto a = integrate_left(pb, 1e-6, 1e8);
    OdeOptions half;
    half.rtol /= 2.0;
    half.atol /= 2.0;
    const auto b = integrate_left(pb, 1e-6, 1e8, half);
    REQUIRE(a.blew_up());
    REQUIRE(b.blew_up());
    CHECK(std::abs(a.R_kappa - b.R_kappa) / a.R_kappa < 1e-3);
    CHECK(a.R_kappa < a.R_termination);
}

TEST_CASE("detect_blowup_radius", "[ode]") {
    const auto pb = make_ode_problem(ProblemParams(0.0, 3.0, 3.0), 1.0);
    const auto br = detect_blowup_radius(pb, {1e4, 1e6, 1e8});
    CHECK(br.R > 0.0);
    CHECK(br.R < pb.rho);
    CHECK(br.error_estimate < 1e-3);
    CHECK(std::exp(br.log_R) == Catch::Approx(br.R).epsilon(1e-12));

    CHECK_THROWS_AS(detect_blowup_radius(make_ode_problem(ProblemParams(0.0, 3.0, 0.0), 1.0), {1e4, 1e6, 1e8}),
                    NotBlowingUp);
    CHECK_THROWS_AS(detect_blowup_radius(pb, {1e8}), DomainError);
    CHECK_THROWS_AS(detect_blowup_radius(pb, {1e8, 1e4}), DomainError);
}

TEST_CASE("kappa sweep: radius and sup shrink with kappa", "[ode]") {
    const auto pb = make_ode_problem(ProblemParams(0.0, 3.0, 2.0), 1.0);
    const auto sw = kappa_sweep(pb, {1.0, 1e-1, 1e-2});
    REQUIRE(sw.size() == 3);
    for (std::size_t i = 0; i < sw.size(); ++i) {
        CHECK(sw[i].terminal == Terminal::BlowUp);
        if (i > 0) {
            CHECK(sw[i].log_R < sw[i - 1].log_R);
            CHECK(sw[i].sup_v < sw[i - 1].sup_v);
        }
    }
    CHECK_THROWS_AS(kappa_sweep(pb, {1e-2, 1.0}), DomainError);
}

TEST_CASE("shooting hits the target value", "[ode]") {
    const auto pb = make_ode_problem(ProblemParams(0.0, 3.0, 3.0), 1.0);
    const double r_star = pb.rho / 2.0;
    for (double eps : {1e-2, 1.0}) {
        const auto shot = solve_bvp_eps(pb, r_star, eps);
        REQUIRE_FALSE(shot.trajectory.blew_up());
        CHECK(std::abs(shot.trajectory.samples.back().v - eps) / eps < 1e-6);
    }
    CHECK_THROWS_AS(solve_bvp_eps(pb, pb.rho, 1.0), DomainError);
}

TEST_CASE("comparison lemma on the ODE", "[ode]") {
    const auto pb = make_ode_problem(ProblemParams(0.0, 3.0, 0.0), 1.0);
    auto lo = pb, hi = pb;
    lo.kappa = 0.5;
    hi.kappa = 2.0;
    const auto u = integrate_left(lo, 1e-4, 1e8);
    const auto v = integrate_left(hi, 1e-4, 1e8);
    CHECK(ode_comparison_check(u, v, ComparisonMode::BVP));

    const auto other = integrate_left(make_ode_problem(ProblemParams(0.0, 2.0, 0.0), 1.0), 1e-4, 1e8);
    CHECK_THROWS_AS(ode_comparison_check(u, other, ComparisonMode::IVP), IncompatibleProblems);
}

TEST_CASE("trajectories stay under the KO super-solution", "[ode]") {
    for (const auto& pp : {ProblemParams(0.0, 3.0, 3.0), ProblemParams(0.0, 3.0, 0.0), ProblemParams(-1.0, 2.0, 1.5)}) {
        const auto tr = integrate_left(make_ode_problem(pp, 1.0), 1e-6, 1e8);
        const auto ko = ko_ode_check(tr);
        INFO("s=" << pp.s << " gamma=" << ko.gamma << " ratio=" << ko.max_ratio);
        CHECK(ko.ok());
    }
}

TEST_CASE("invalid problems", "[ode]") {
    auto pb = make_ode_problem(ProblemParams(0.0, 3.0, 0.0), 1.0);
    CHECK_THROWS_AS(integrate_left(pb, pb.rho * 2.0, 1e8), DomainError);
    CHECK_THROWS_AS(integrate_left(pb, 1e-6, -1.0), DomainError);
    pb.eta.claimed_role = Role::SubHarmonic;
    CHECK_THROWS_AS(integrate_left(pb, 1e-6, 1e8), DomainError);
}
