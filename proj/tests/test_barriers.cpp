#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardy_blowup/barriers.hpp"

using namespace hardy;
using Catch::Approx;

TEST_CASE("closed-form values", "[barriers]") {
    CHECK(eval_barrier(pure_power(0.5, Role::SuperHarmonic), 0.25) == Approx(0.5).epsilon(1e-15));
    const auto H = power_corrected(0.0, 0.5, Correction::Plus, Role::SuperHarmonic, Anchor::BetaMinus);
    CHECK(eval_barrier(H, 0.25) == Approx(1.5).epsilon(1e-15));
    CHECK(eval_barrier(log_power(1.0, Role::SuperHarmonic), std::exp(-1.0)) ==
          Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(eval_barrier(log_power(1.0, Role::SuperHarmonic), 1.0), DomainError);
    CHECK_THROWS_AS(eval_barrier(pure_power(0.5, Role::SuperHarmonic), 0.0), DomainError);
}

TEST_CASE("residual signs from the lemma", "[barriers]") {
    const ProblemParams pp0(0.0, 2.0, 0.0);
    const auto roots0 = *characteristic_roots(0.0);
    CHECK(linear_residual(pure_power(roots0.beta_minus, Role::SuperHarmonic), pp0, 0.1) == 0.0);
    CHECK(linear_residual(local_barrier("h_bar", 0.0, 0.5), pp0, 0.01) > 0.0);
    const ProblemParams pq(0.25, 2.0, 0.0);
    CHECK(linear_residual(local_barrier("H_under", 0.25, 0.5), pq, 0.01) < 0.0);
}

TEST_CASE("closed form agrees with finite differences", "[barriers]") {
    for (double mu : {-1.0, -0.25, 0.0, 0.2, 0.25}) {
        const ProblemParams pp(mu, 2.0, 0.0);
        for (const auto& nb : local_barriers(mu, default_barrier_epsilon(mu))) {
            for (double d : {1e-4, 1e-3, 1e-2, 0.05}) {
                const double exact = linear_residual(nb.spec, pp, d);
                const double fd = linear_residual_fd(nb.spec, pp, d);
                const double scale = residual_scale(nb.spec, pp, d, false);
                CHECK(std::abs(exact - fd) / (scale + std::abs(exact)) < 1e-5);
            }
        }
    }
    // KO profile in both distance models
    const ProblemParams pk(0.1, 3.0, 0.5);
    for (auto dist : {DistanceModel::Slab, DistanceModel::BallSmooth}) {
        const auto k = ko_profile(pk, 2.0, 0.01, dist, 3);
        for (double d : {0.02, 0.1, 0.5}) {
            const double exact = linear_residual(k, pk, d);
            const double fd = linear_residual_fd(k, pk, d);
            CHECK(std::abs(exact - fd) / (residual_scale(k, pk, d, false) + std::abs(exact)) < 1e-5);
        }
    }
}

TEST_CASE("nonlinear residual", "[barriers]") {
    const ProblemParams pp(0.0, 3.0, 0.0);
    CHECK(nonlinear_residual(0.0, 0.0, pp, 0.3) == 0.0);
    const double d = 0.1, u = std::sqrt(2.0) / d, upp = 2.0 * std::sqrt(2.0) / (d * d * d);
    CHECK(std::abs(nonlinear_residual(u, upp, pp, d)) < 1e-12 * std::pow(u, 3.0));
    // gamma^{p-1} = b(b-1) pure power
    const ProblemParams pq(0.0, 2.0, 0.5);
    const double b = pq.ko_exponent(), g = b * (b - 1.0);
    const double dd = 0.02, v = g * std::pow(dd, b), vpp = g * b * (b - 1.0) * std::pow(dd, b - 2.0);
    CHECK(std::abs(nonlinear_residual(v, vpp, pq, dd)) < 1e-12 * std::abs(vpp));
    CHECK_THROWS_AS(nonlinear_residual(-1.0, 0.0, pp, 0.1), DomainError);
}

TEST_CASE("validity radius", "[barriers]") {
    const DistanceWindow w{1e-6, 0.5, 1000};
    CHECK(validity_radius(local_barrier("h_bar", 0.0, 0.5), ProblemParams(0.0, 2.0, 0.0), w) >= 0.2);
    const auto r = *characteristic_roots(0.2);
    const DistanceWindow w2{1e-6, 0.05, 1000};
    CHECK(validity_radius(pure_power(0.5 * (r.beta_minus + r.beta_plus), Role::SuperHarmonic),
                          ProblemParams(0.2, 2.0, 0.0), w2) == w2.delta_max);
    std::string diag;
    CHECK(validity_radius(pure_power(1.1, Role::SuperHarmonic), ProblemParams(0.0, 2.0, 0.0), w2, &diag) == 0.0);
    CHECK_FALSE(diag.empty());
}

TEST_CASE("sign dichotomy for every local barrier", "[barriers]") {
    const DistanceWindow w{1e-6, 0.05, 1000};
    for (double mu : {-1.0, -0.25, 0.0, 0.2, 0.25}) {
        const ProblemParams pp(mu, 2.0, 0.0);
        for (const auto& nb : local_barriers(mu, default_barrier_epsilon(mu))) {
            INFO("mu=" << mu << " " << nb.name);
            CHECK(validity_radius(nb.spec, pp, w) == w.delta_max);
        }
    }
}

TEST_CASE("correction exponent must be admissible", "[barriers]") {
    CHECK_THROWS_AS(local_barriers(0.2, 0.5), DomainError);
    CHECK_NOTHROW(local_barriers(0.2, default_barrier_epsilon(0.2)));
    CHECK_THROWS_AS(local_barriers(0.3, 0.1), DomainError);
}

TEST_CASE("KO super-solutions", "[barriers]") {
    const ProblemParams pp(0.0, 3.0, 0.0);
    const auto k = ko_supersolution(pp, 0.0);
    CHECK(k.gamma >= std::sqrt(2.0));
    for (double d : ko_check_points(0.0, 1000))
        CHECK(solution_residual(k, pp, d) >= -1e-10 * residual_scale(k, pp, d, true));

    const auto kp = ko_supersolution(pp, 0.1);
    CHECK(eval_barrier(kp, 0.1 + 1e-8) > 1e7);
    CHECK(eval_barrier(kp, 0.1 + 1e-8) > eval_barrier(kp, 0.1 + 1e-6));

    const ProblemParams pq(0.25, 2.0, 1.0);
    const auto kq = ko_supersolution(pq, 0.0);
    CHECK(ko_is_supersolution(kq, pq, ko_check_points(0.0, 1000)));

    const ProblemParams pb(1.0, 2.0, 0.0);
    const auto kb = ko_supersolution(pb, 0.0, DistanceModel::BallSmooth, 3);
    CHECK(ko_is_supersolution(kb, pb, ko_check_points(0.0, 1000)));
}
