#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nklab/errors.hpp"
#include "nklab/params.hpp"

using namespace nklab;

namespace {

// Independent oracle: plain interval bisection on a monotone function,
// deliberately not sharing code with the library root finder.
template <class F>
double oracle_bisect(F f, double lo, double hi, double tol = 1e-12) {
    double flo = f(lo);
    for (int it = 0; it < 400 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0) == (flo < 0)) {
            lo = mid;
            flo = f(mid);
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double oracle_h(double x) { return x == 0.0 ? 1.0 : (1.0 - std::exp(-x)) / x; }

} // namespace

TEST_CASE("h_decay values and monotonicity") {
    CHECK(h_decay(0.0) == 1.0);
    // oracle: bisection on h(x) = level
    const double x_half = oracle_bisect([](double x) { return 0.5 - oracle_h(x); }, 0.1, 10.0);
    const double x_quarter = oracle_bisect([](double x) { return 0.25 - oracle_h(x); }, 0.1, 20.0);
    CHECK(x_half == doctest::Approx(1.5936).epsilon(1e-3));
    CHECK(x_quarter == doctest::Approx(3.9207).epsilon(1e-3));
    CHECK(h_decay(x_half) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(h_decay(x_quarter) == doctest::Approx(0.25).epsilon(1e-9));

    double prev = h_decay(0.0);
    for (double x = 1e-4; x < 50.0; x *= 1.7) {
        const double cur = h_decay(x);
        CHECK(cur < prev);
        CHECK(cur > 0.0);
        CHECK(cur <= 1.0);
        prev = cur;
    }
    // series branch agrees with the expm1-based formula near the switch
    CHECK(h_decay(9e-9) == doctest::Approx(-std::expm1(-9e-9) / 9e-9).epsilon(1e-14));
    CHECK(h_decay(2e-8) == doctest::Approx(-std::expm1(-2e-8) / 2e-8).epsilon(1e-14));
    CHECK_THROWS_AS(h_decay(-1.0), std::domain_error);
}

TEST_CASE("g_eps shape and closed-form root checks") {
    PhysicalParams P{.mu = 1.0, .lambda = 0.0, .kappa = 0.5, .p = 1.0, .epsilon = 1e-3}; // nu = 2
    // increasing on a sampled grid, range in (-inf, 1)
    double prev = -1e300;
    for (double x = 1e-6; x < 1e12; x *= 3.0) {
        const double v = g_eps(x, P);
        CHECK(v > prev);
        CHECK(v < 1.0);
        prev = v;
    }
    CHECK_THROWS_AS(g_eps(0.0, P), std::domain_error);

    // (p=1, nu=2, kappa=0.5, eps=1e-3): root near 2, g(2) ~ 0 within 1e-3
    CHECK(std::abs(g_eps(2.0, P)) < 1e-3);
    const double root = oracle_bisect([&](double x) { return g_eps(x, P); }, 0.5, 10.0);
    CHECK(threshold_x(P) == doctest::Approx(root).epsilon(1e-10));

    // monotone in eps at fixed x
    PhysicalParams P2 = P;
    P2.epsilon = 0.1;
    for (double x : {0.5, 2.0, 37.0}) CHECK(g_eps(x, P2) > g_eps(x, P));
}

TEST_CASE("threshold_x: asymptotics and degenerate cases") {
    PhysicalParams P{.mu = 1.0, .lambda = 0.0, .kappa = 0.5, .p = 1.0, .epsilon = 1e-3};
    CHECK(threshold_x(P) == doctest::Approx(2.0).epsilon(1e-2)); // 4p/(nu^2-4kappa) = 2, M = 2 > 1

    // M = 1 asymptotic bracket: sqrt(2p/kappa)(1+eps^2)/eps < x_eps < sqrt(2p/kappa)(1+sqrt(eps))/eps
    PhysicalParams Q{.mu = 1.0, .lambda = 0.0, .kappa = 1.0, .p = 1.0, .epsilon = 0.01};
    const double xe = threshold_x(Q);
    const double c = std::sqrt(2.0 * Q.p / Q.kappa);
    CHECK(xe > c * (1.0 + Q.epsilon * Q.epsilon) / Q.epsilon);
    CHECK(xe < c * (1.0 + std::sqrt(Q.epsilon)) / Q.epsilon);
    CHECK(xe > 141.4);
    CHECK(xe < 155.6);

    // kappa = 0 closed form
    PhysicalParams D{.mu = 1.0, .lambda = 0.0, .kappa = 0.0, .p = 1.0, .epsilon = 1.0};
    CHECK(threshold_x(D) == 4.0 * D.p / (D.nu() * D.nu()));

    // 4p/nu^2 < x_eps in any case
    for (double kap : {0.25, 1.0, 4.0}) {
        PhysicalParams R{.mu = 0.5, .lambda = 0.0, .kappa = kap, .p = 1.3, .epsilon = 0.05};
        CHECK(threshold_x(R) > 4.0 * R.p / (R.nu() * R.nu()));
    }

    // eps-monotonicity: x_eps grows as eps shrinks
    PhysicalParams S{.mu = 1.0, .lambda = 0.0, .kappa = 2.0, .p = 1.0, .epsilon = 1.0};
    double prev = 0.0;
    for (double e : {1.0, 0.3, 0.1, 0.03, 0.01}) {
        S.epsilon = e;
        const double x = threshold_x(S);
        CHECK(x > prev);
        prev = x;
    }
}

TEST_CASE("threshold_y sits above threshold_x at the right g-level") {
    for (double kap : {0.25, 0.6, 1.0, 3.0}) {
        PhysicalParams P{.mu = 1.0, .lambda = 0.0, .kappa = kap, .p = 1.0, .epsilon = 0.05};
        const double x = threshold_x(P), y = threshold_y(P);
        CHECK(y > x);
        const double M = P.ratio_M();
        const double target = M < 0.75 ? 0.25 : 1.0 - 1.0 / (2.0 * M);
        CHECK(g_eps(y, P) == doctest::Approx(target).epsilon(1e-9));
    }
    // (p=1, nu=1, kappa=1): M = 1/4 < 3/4, level 1/4
    PhysicalParams L{.mu = 0.5, .lambda = 0.0, .kappa = 1.0, .p = 1.0, .epsilon = 0.1};
    CHECK(g_eps(threshold_y(L), L) == doctest::Approx(0.25).epsilon(1e-9));
    // (p=1, nu=2, kappa=1): M = 1, level 1/2, value agrees with oracle bisection
    PhysicalParams M1{.mu = 1.0, .lambda = 0.0, .kappa = 1.0, .p = 1.0, .epsilon = 0.1};
    const double oracle =
        oracle_bisect([&](double x) { return g_eps(x, M1) - 0.5; }, 1.0, 1e6);
    CHECK(threshold_y(M1) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("gamma_pair and root_a") {
    auto [g1, g2] = gamma_pair(2.0); // M >= 3/4: universal values
    CHECK(g1 == doctest::Approx(1.5936).epsilon(1e-3));
    CHECK(g2 == doctest::Approx(3.9207).epsilon(1e-3));
    CHECK(g1 < g2);

    auto [h1, h2] = gamma_pair(0.5); // M < 3/4: h(g1) = 3M/4, h(g2) = M/2
    CHECK(h_decay(h1) == doctest::Approx(0.375).epsilon(1e-9));
    CHECK(h_decay(h2) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(h1 < h2);
    // ordering a(M) < gamma1 when M < 3/4
    CHECK(root_a(0.5) < h1);

    CHECK(root_a(0.5) == doctest::Approx(1.5936).epsilon(1e-3));
    CHECK(root_a(0.5) > 1.0);
    CHECK(root_a(0.5) < 2.0);
    CHECK(root_a(0.25) == doctest::Approx(3.9207).epsilon(1e-3));
    CHECK(root_a(0.25) > 3.0);
    CHECK(root_a(0.25) < 4.0);
    // M -> 1^-: root -> 0^+
    CHECK(root_a(0.999) < 0.01);
    CHECK_THROWS_AS(root_a(1.0), std::domain_error);
    // bracket 1/M - 1 < a < 1/M
    for (double M : {0.2, 0.5, 0.9}) {
        const double a = root_a(M);
        CHECK(a > 1.0 / M - 1.0);
        CHECK(a < 1.0 / M);
    }
}

TEST_CASE("threshold_asymptote three branches") {
    PhysicalParams A{.mu = 1.0, .lambda = 0.0, .kappa = 0.5, .p = 1.0, .epsilon = 1e-3};
    CHECK(threshold_asymptote(A) == doctest::Approx(2.0));
    PhysicalParams B{.mu = 1.0, .lambda = 0.0, .kappa = 1.0, .p = 1.0, .epsilon = 0.01};
    CHECK(threshold_asymptote(B) == doctest::Approx(100.0 * std::sqrt(2.0)).epsilon(1e-12));
    PhysicalParams C{.mu = 0.5, .lambda = 0.0, .kappa = 1.0, .p = 1.0, .epsilon = 0.1};
    CHECK(threshold_asymptote(C) == doctest::Approx(root_a(0.25) / 0.01).epsilon(1e-9));
    CHECK(threshold_asymptote(C) == doctest::Approx(392.07).epsilon(1e-3));
}

TEST_CASE("eps^2 x_eps converges to a(M) when M < 1") {
    PhysicalParams P{.mu = 0.5, .lambda = 0.0, .kappa = 1.0, .p = 1.0, .epsilon = 1e-3}; // M = 1/4
    const double a = root_a(0.25);
    CHECK(P.epsilon * P.epsilon * threshold_x(P) == doctest::Approx(a).epsilon(1e-2));
}

TEST_CASE("bracket chain and eps0 detection") {
    const std::vector<double> sweep{1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
    for (double p : {0.5, 1.0, 2.0})
        for (double nu : {0.5, 1.0, 2.0})
            for (double kap : {0.5, 1.0, 2.0}) {
                PhysicalParams P{.mu = nu / 2.0, .lambda = 0.0, .kappa = kap, .p = p, .epsilon = 1.0};
                const double eps0 = detect_eps0(P, sweep);
                CHECK(eps0 > 0.0); // chain must eventually hold
                for (double e : sweep) {
                    if (e > eps0) continue;
                    P.epsilon = e;
                    CHECK(bracket_chain_holds(P));
                }
            }
}

TEST_CASE("threshold_report wiring") {
    PhysicalParams P{.mu = 0.5, .lambda = 0.0, .kappa = 1.0, .p = 1.0, .epsilon = 0.01}; // M = 1/4
    const auto r = threshold_report(P);
    CHECK(r.x_eps < r.y_eps);
    CHECK(r.gamma1 < r.gamma2);
    CHECK(r.m == doctest::Approx(0.5));
    CHECK(r.m > 0.0);
    CHECK(r.m < 1.0);
    REQUIRE(r.a_M.has_value());
    CHECK(*r.a_M > 1.0 / 0.25 - 1.0);
    CHECK(*r.a_M < 1.0 / 0.25);

    PhysicalParams Q{.mu = 1.0, .lambda = 0.0, .kappa = 0.5, .p = 1.0, .epsilon = 0.01}; // M = 2
    CHECK(!threshold_report(Q).a_M.has_value());
    CHECK(medium_regime_m(2.0) == doctest::Approx(std::sqrt(0.75)));
}

TEST_CASE("solver residual is consistent with the bisection tolerance") {
    PhysicalParams P{.mu = 1.0, .lambda = 0.0, .kappa = 1.5, .p = 0.7, .epsilon = 0.02};
    const double tol = 1e-12;
    const double x = threshold_x(P, tol);
    // |g(x)| <= tol * |g'| estimate, g' by centered difference
    const double dx = 1e-6 * x;
    const double slope = (g_eps(x + dx, P) - g_eps(x - dx, P)) / (2.0 * dx);
    CHECK(std::abs(g_eps(x, P)) <= 4.0 * tol * std::max(1.0, x) * std::abs(slope));
}

TEST_CASE("validate names the offending field") {
    PhysicalParams P{.mu = 1.0, .lambda = 0.0, .kappa = -1.0, .p = 1.0, .epsilon = 1.0};
    CHECK_THROWS_WITH_AS(P.validate(), "params.kappa out of range", UsageError);
    PhysicalParams Q{.mu = -1.0, .lambda = 0.0, .kappa = 1.0, .p = 1.0, .epsilon = 1.0};
    CHECK_THROWS_AS(Q.validate(), UsageError);
}
