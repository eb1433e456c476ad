#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardy_blowup/asymptotics.hpp"
#include "hardy_blowup/radial_solver.hpp"

using namespace hardy;

namespace {

std::vector<double> geometric(double lo, double hi, int n) {
    std::vector<double> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d[std::size_t(i)] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return d;
}

template <class F>
std::vector<double> apply(const std::vector<double>& d, F f) {
    std::vector<double> v;
    for (double x : d) v.push_back(f(x));
    return v;
}

} // namespace

TEST_CASE("exact powers are recovered", "[asymptotics]") {
    const auto d = geometric(1e-6, 1e-1, 200);
    for (double e = -3.0; e <= 3.0; e += 0.25) {
        const auto f = fit_power(d, apply(d, [&](double x) { return 2.5 * std::pow(x, e); }), {1e-5, 1e-2});
        CHECK(std::abs(f.exponent - e) < 1e-10);
        CHECK(f.amplitude == Catch::Approx(2.5).epsilon(1e-9));
        CHECK(f.max_rel_residual < 1e-10);
    }
}

TEST_CASE("lower-order corrections barely move the fit", "[asymptotics]") {
    const auto d = geometric(1e-5, 1e-2, 300);
    const auto f = fit_power(d, apply(d, [](double x) { return std::sqrt(2.0) / x * (1.0 + x); }), {1e-4, 1e-3});
    CHECK(std::abs(f.exponent + 1.0) < 0.01);
    const auto c = fit_power(d, apply(d, [](double) { return 3.0; }), {1e-4, 1e-3});
    CHECK(std::abs(c.exponent) < 1e-12);
}

TEST_CASE("power times log power", "[asymptotics]") {
    const auto d = geometric(1e-7, 1e-3, 300);
    const auto f = fit_power_log(d, apply(d, [](double x) { return std::sqrt(x) * -std::log(x); }), {1e-6, 1e-4});
    CHECK(std::abs(f.log_power - 1.0) < 0.02);
    CHECK(f.exponent == 0.5);
    const auto g = fit_power_log(d, apply(d, [](double x) { return std::sqrt(x); }), {1e-6, 1e-4});
    CHECK(std::abs(g.log_power) < 0.02);
    CHECK_THROWS_AS(fit_power_log(d, apply(d, [](double x) { return x; }), {1e-6, 2.0}), DomainError);
}

TEST_CASE("fit errors", "[asymptotics]") {
    const auto d = geometric(1e-4, 1e-1, 50);
    CHECK_THROWS_AS(fit_power(d, apply(d, [](double x) { return x; }), {1e-2, 1.1e-2}), InsufficientSamples);
    CHECK_THROWS_AS(fit_power(d, apply(d, [](double x) { return x - 1e-3; }), {1e-4, 1e-2}), NonpositiveValues);
    CHECK_THROWS_AS(fit_power(d, std::vector<double>(3, 1.0), {1e-4, 1e-2}), DomainError);
}

TEST_CASE("classification by exponent", "[asymptotics]") {
    const auto rep = existence_verdict(ProblemParams(0.0, 3.0, 0.0));
    AsymptoticFit f;
    f.exponent = -1.0;
    CHECK(classify(f, rep).verdict == SolutionVerdict::XXL);
    f.exponent = 1.0;
    CHECK(classify(f, rep).verdict == SolutionVerdict::S);
    f.exponent = 0.0;
    CHECK(classify(f, rep).verdict == SolutionVerdict::ML);
    f.exponent = -0.5;
    CHECK(classify(f, rep).verdict == SolutionVerdict::Indeterminate);
    f.exponent = -1.0;
    f.max_rel_residual = 0.2;
    CHECK(classify(f, rep).verdict == SolutionVerdict::Indeterminate);

    // mu = 1/4: pure powers cannot be ML, the log model decides
    const auto deg = existence_verdict(ProblemParams(0.25, 2.0, 1.0));
    AsymptoticFit lf;
    lf.model = FitModel::PowerTimesLogPower;
    lf.exponent = 0.5;
    lf.log_power = 1.03;
    CHECK(classify(lf, deg).verdict == SolutionVerdict::ML);
    lf.log_power = 0.02;
    CHECK(classify(lf, deg).verdict == SolutionVerdict::S);
    AsymptoticFit pf;
    pf.exponent = 0.5;
    CHECK(classify(pf, deg).verdict != SolutionVerdict::ML);

    CHECK_THROWS_AS(classify(f, existence_verdict(ProblemParams(1.0, 2.0, 0.0))), PreconditionError);
}

TEST_CASE("classification is scale invariant", "[asymptotics]") {
    const auto rep = existence_verdict(ProblemParams(0.0, 3.0, 0.0));
    const auto d = geometric(1e-5, 1e-1, 200);
    for (double c : {1e-6, 1.0, 1e6}) {
        const auto v = apply(d, [&](double x) { return c * std::sqrt(2.0) / x; });
        CHECK(classify_profile(d, v, {1e-4, 1e-2}, rep).verdict == SolutionVerdict::XXL);
    }
    const auto zero = classify_profile(d, std::vector<double>(d.size(), 0.0), {1e-4, 1e-2}, rep);
    CHECK(zero.verdict == SolutionVerdict::S);
    CHECK(zero.trivial);
}

TEST_CASE("window sensitivity", "[asymptotics]") {
    const auto d = geometric(1e-6, 1e-1, 300);
    const auto clean = window_sensitivity(d, apply(d, [](double x) { return 1.0 / x; }), {1e-5, 1e-3});
    CHECK_FALSE(clean.under_resolved);
    const auto bent = window_sensitivity(d, apply(d, [](double x) { return 1.0 / x + 1.0 / (x * x) * 1e-4; }),
                                         {1e-5, 1e-3});
    CHECK(bent.under_resolved);
}

TEST_CASE("the large solution at mu = 1/4 carries one log", "[asymptotics]") {
    const ProblemParams pp(0.25, 2.0, 1.0);
    const auto grid = Grid::geometric(1e-6, 2000);
    const auto pr = build_subsuper_pair(pp, Geometry::slab(), grid, PairTarget::ML);
    const auto s = solve_bracketed(pp, Geometry::slab(), grid, pr);
    const auto c = classify_profile(s.grid.nodes, s.values, default_fit_window(1e-6), existence_verdict(pp));
    INFO("log power " << c.evidence.log_power);
    CHECK(std::abs(c.evidence.log_power - 1.0) < 0.1);
    CHECK(c.verdict == SolutionVerdict::ML);
}
