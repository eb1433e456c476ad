#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hardy_blowup/regime.hpp"

using namespace hardy;
using Catch::Approx;

TEST_CASE("characteristic roots", "[regime]") {
    auto r0 = characteristic_roots(0.0);
    REQUIRE(r0);
    CHECK(r0->beta_minus == 0.0);
    CHECK(r0->beta_plus == 1.0);
    CHECK_FALSE(r0->degenerate);

    auto rq = characteristic_roots(0.25);
    REQUIRE(rq);
    CHECK(rq->beta_minus == 0.5);
    CHECK(rq->beta_plus == 0.5);
    CHECK(rq->degenerate);

    CHECK_FALSE(characteristic_roots(0.3));

    auto r2 = characteristic_roots(-2.0);
    REQUIRE(r2);
    CHECK(r2->beta_minus == Approx(-1.0).margin(1e-14));
    CHECK(r2->beta_plus == Approx(2.0).margin(1e-14));
}

TEST_CASE("roots satisfy beta(1-beta) = mu", "[regime]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-10.0, 0.25);
    for (int i = 0; i < 500; ++i) {
        const double mu = U(rng);
        const auto r = *characteristic_roots(mu);
        CHECK(r.beta_minus <= r.beta_plus);
        CHECK(std::abs(r.beta_minus + r.beta_plus - 1.0) < 1e-12);
        CHECK(std::abs(r.beta_minus * r.beta_plus - mu) < 1e-12 * std::max(1.0, std::abs(mu)));
        for (double b : {r.beta_minus, r.beta_plus}) CHECK(std::abs(b * (1.0 - b) - mu) < 1e-12 * std::max(1.0, std::abs(mu)));
    }
}

TEST_CASE("existence verdict examples", "[regime]") {
    auto a = existence_verdict({0.0, 3.0, 0.0});
    CHECK(a.verdict == Verdict::Existence);
    CHECK(*a.threshold_s == 2.0);

    CHECK(existence_verdict({0.0, 3.0, 2.0}).verdict == Verdict::Nonexistence);

    auto c = existence_verdict({0.25, 3.0, 3.0});
    CHECK(c.verdict == Verdict::Nonexistence);
    CHECK(*c.threshold_s == 3.0);

    auto d = existence_verdict({-0.75, 2.0, 1.0});
    CHECK(*d.threshold_s == Approx(1.5).margin(1e-14));
    CHECK(d.verdict == Verdict::Existence);

    CHECK(existence_verdict({0.3, 2.0, 0.0}).verdict == Verdict::NoSuperharmonics);
}

TEST_CASE("p* conventions at beta_- = 0", "[regime]") {
    auto a = existence_verdict({0.0, 3.0, 1.0});
    CHECK(a.p_star->kind == ExtendedReal::Kind::PlusInfinity);
    CHECK(verdict_from_p_star(a) == Verdict::Existence);
    auto b = existence_verdict({0.0, 3.0, 2.0});
    CHECK(b.p_star->kind == ExtendedReal::Kind::MinusInfinity);
    CHECK(verdict_from_p_star(b) == Verdict::Nonexistence);
}

TEST_CASE("critical mu examples", "[regime]") {
    CHECK(critical_mu(3.0, 2.0) == Approx(0.0).margin(1e-15));
    CHECK(critical_mu(3.0, 3.0) == Approx(0.25).margin(1e-15));
    CHECK(critical_mu(2.0, 0.0) == Approx(-6.0).margin(1e-14));
    // beta_-(mu*) equals the KO exponent
    CHECK(characteristic_roots(-6.0)->beta_minus == Approx(-2.0).margin(1e-14));
}

TEST_CASE("verdict flips at mu*", "[regime]") {
    for (auto [p, s] : {std::pair{3.0, 1.0}, {2.0, 0.0}, {1.5, 1.2}, {4.0, -1.0}}) {
        const double ms = critical_mu(p, s);
        REQUIRE(s < (p + 3.0) / 2.0);
        const double e = 1e-9 * std::max(1.0, std::abs(ms));
        CHECK(existence_verdict({ms - e, p, s}).verdict == Verdict::Nonexistence);
        CHECK(existence_verdict({ms + e, p, s}).verdict == Verdict::Existence);
    }
}

TEST_CASE("verdict is monotone in mu", "[regime]") {
    for (double p : {1.5, 2.0, 3.0, 5.0})
        for (double s : {-2.0, 0.0, 1.0, 2.0, 3.0, 4.5}) {
            bool seen_existence = false;
            for (double mu = -3.0; mu <= 0.25; mu += 0.01) {
                const bool e = existence_verdict({mu, p, s}).verdict == Verdict::Existence;
                CHECK_FALSE((seen_existence && !e));
                seen_existence = seen_existence || e;
            }
        }
}

TEST_CASE("three threshold parameterizations agree", "[regime]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const ProblemParams pp(-3.0 + 3.25 * U(rng), 1.0 + 4.0 * U(rng) + 1e-9, -2.0 + 7.0 * U(rng));
        const auto rep = existence_verdict(pp);
        CHECK(verdict_from_p_star(rep) == rep.verdict);
        CHECK(verdict_from_mu_star(rep) == rep.verdict);
    }
}

TEST_CASE("invalid parameters", "[regime]") {
    CHECK_THROWS_AS(ProblemParams(0.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ProblemParams(std::nan(""), 2.0, 0.0), DomainError);
    CHECK_THROWS_AS(critical_mu(0.5, 0.0), DomainError);
}
