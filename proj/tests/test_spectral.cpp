#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "nklab/errors.hpp"
#include "nklab/spectral.hpp"

using namespace nklab;

namespace {
const PeriodicGrid g1d{.dim = 1, .n = 64, .length = 2.0 * std::numbers::pi};
const PeriodicGrid g2d{.dim = 2, .n = 32, .length = 2.0 * std::numbers::pi};

std::vector<double> random_samples(const PeriodicGrid& g, int comps, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> s(g.size() * comps);
    for (auto& v : s) v = u(rng);
    return s;
}
} // namespace

TEST_CASE("transform round trip and Parseval") {
    for (const auto& g : {g1d, g2d}) {
        const auto samples = random_samples(g, 1, 7);
        const auto f = SpectralField::from_samples(g, samples);
        const auto back = f.to_samples();
        double maxerr = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            maxerr = std::max(maxerr, std::abs(back[i] - samples[i]));
            scale = std::max(scale, std::abs(samples[i]));
        }
        CHECK(maxerr <= 1e-12 * scale);

        // Parseval: physical quadrature norm equals spectral sum
        double phys = 0.0;
        for (double v : samples) phys += v * v;
        const double vol = g.dim == 1 ? g.length : g.length * g.length;
        phys = std::sqrt(vol * phys / double(g.size()));
        CHECK(f.l2() == doctest::Approx(phys).epsilon(1e-10));
    }
}

TEST_CASE("constant field transforms to the k=0 coefficient only") {
    std::vector<double> c(g1d.size(), 3.25);
    const auto f = SpectralField::from_samples(g1d, c);
    CHECK(f.coef(0, 0).real() == doctest::Approx(3.25).epsilon(1e-14));
    double rest = 0.0;
    for (std::size_t i = 1; i < g1d.size(); ++i) rest += std::abs(f.coef(0, i));
    CHECK(rest < 1e-12);
}

TEST_CASE("multiplier ops: identity, composition, shift") {
    auto f = random_band_limited(g1d, 1, 12, 42);
    const auto id = apply_multiplier(f, [](std::array<double, 2>) { return Complex(1.0); });
    CHECK((id - f).l2() < 1e-14);

    auto m2 = [](std::array<double, 2> xi) { return Complex(xi[0] * xi[0] + xi[1] * xi[1]); };
    auto m4 = [](std::array<double, 2> xi) {
        const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
        return Complex(r2 * r2);
    };
    const auto twice = apply_multiplier(apply_multiplier(f, m2), m2);
    const auto once = apply_multiplier(f, m4);
    CHECK((twice - once).l2() <= 1e-12 * once.l2());

    // e^{i xi a} shifts samples circularly by -a... check against rotated samples
    const double a = g1d.length * 5.0 / g1d.n; // five grid cells
    const auto shifted =
        apply_multiplier(f, [a](std::array<double, 2> xi) { return std::polar(1.0, xi[0] * a); });
    const auto s0 = f.to_samples();
    const auto s1 = shifted.to_samples();
    for (int i = 0; i < g1d.n; ++i) {
        const int j = (i + 5) % g1d.n; // f(x + a)
        CHECK(s1[i] == doctest::Approx(s0[j]).epsilon(1e-10));
    }
    CHECK_THROWS_AS(
        apply_multiplier(f, [](std::array<double, 2>) { return Complex(std::nan("")); }),
        NumericalError);
}

TEST_CASE("helmholtz split: gradient, divergence-free, reconstruction") {
    // u = grad(phi) -> w = 0
    auto phi = random_band_limited(g2d, 1, 8, 3);
    auto u_grad = gradient_field(phi);
    auto parts = helmholtz_split(u_grad);
    CHECK(parts.w.l2() < 1e-12 * u_grad.l2());

    // u = (-d2 psi, d1 psi) -> v = 0
    auto psi = random_band_limited(g2d, 1, 8, 4);
    SpectralField u_rot(g2d, 2);
    auto d0 = derivative(psi, 0), d1 = derivative(psi, 1);
    for (std::size_t i = 0; i < g2d.size(); ++i) {
        u_rot.coef(0, i) = -d1.coef(0, i);
        u_rot.coef(1, i) = d0.coef(0, i);
    }
    auto parts2 = helmholtz_split(u_rot);
    CHECK(parts2.v.l2() < 1e-12 * u_rot.l2());

    // random vector field reconstructs
    auto u = random_band_limited(g2d, 2, 8, 5);
    auto p3 = helmholtz_split(u);
    auto back = helmholtz_recompose(p3.v, p3.w, 2);
    CHECK((back - u).l2() <= 1e-10 * u.l2());

    // 1D: w identically zero and reconstruction holds
    auto u1 = random_band_limited(g1d, 1, 12, 6);
    auto p1 = helmholtz_split(u1);
    CHECK(p1.w.l2() == 0.0);
    CHECK((helmholtz_recompose(p1.v, p1.w, 1) - u1).l2() <= 1e-10 * u1.l2());

    // nonzero mean is rejected
    SpectralField bad(g1d, 1);
    bad.set_mode(0, {0, 0}, 1.0);
    CHECK_THROWS_AS(helmholtz_split(bad), UsageError);
}

TEST_CASE("capillary operator: symbol values and Laplacian limit") {
    CHECK(capillary_symbol(4.0, 0.1) == doctest::Approx(-3.9211).epsilon(1e-4));

    auto f = random_band_limited(g1d, 1, 12, 9);
    // constant field maps to zero
    SpectralField c(g1d, 1);
    c.set_mode(0, {0, 0}, 2.0);
    CHECK(capillary_op(c, 0.5).l2() == 0.0);

    // |multiplier + |xi|^2| <= eps^2 |xi|^4 / 2 on all grid xi (alternating series)
    for (double eps : {1.0, 0.1, 0.01}) {
        for (std::size_t i = 0; i < g1d.size(); ++i) {
            const double xi2 = g1d.xi_norm2(i);
            CHECK(std::abs(capillary_symbol(xi2, eps) + xi2) <= eps * eps * xi2 * xi2 / 2.0 + 1e-14);
        }
    }
    // nonpositive real symbol with the annulus-constant lower envelope:
    // -symbol(xi) >= (1 - e^{-c0^2}) min(eps^-2, |xi|^2) with c0 = 3/4
    const double floor_const = 1.0 - std::exp(-0.75 * 0.75);
    for (double eps : {1.0, 0.1, 0.01})
        for (std::size_t i = 1; i < g1d.size(); ++i) {
            const double xi2 = g1d.xi_norm2(i);
            const double sym = capillary_symbol(xi2, eps);
            CHECK(sym <= 0.0);
            CHECK(-sym >= floor_const * std::min(1.0 / (eps * eps), xi2) * (1.0 - 1e-12));
        }
    CHECK_THROWS_AS(capillary_op(f, 0.0), std::domain_error);
}

TEST_CASE("symmetric difference: zero cases and single-mode amplitude") {
    auto f = random_band_limited(g1d, 1, 12, 10);
    CHECK(symmetric_difference(f, {0.0, 0.0}, 0.5).l2() == 0.0);

    SpectralField c(g1d, 1);
    c.set_mode(0, {0, 0}, 1.5);
    CHECK(symmetric_difference(c, {0.7, 0.0}, 0.5).l2() == 0.0);

    SpectralField mode(g1d, 1);
    mode.set_mode(0, {3, 0}, Complex(0.5, 0.25));
    const double eps = 0.2, y = 1.3;
    const auto diff = symmetric_difference(mode, {y, 0.0}, eps);
    const double expected = std::abs(2.0 * (std::cos(eps * 3.0 * y) - 1.0)) * std::abs(mode.mode(0, {3, 0}));
    CHECK(std::abs(diff.mode(0, {3, 0})) == doctest::Approx(expected).epsilon(1e-12));

    // diagonal operators commute
    auto a = symmetric_difference(capillary_op(f, 0.3), {0.4, 0.0}, 0.3);
    auto b = capillary_op(symmetric_difference(f, {0.4, 0.0}, 0.3), 0.3);
    CHECK((a - b).l2() <= 1e-13 * (a.l2() + 1.0));
}

TEST_CASE("band limit guard") {
    auto ok = random_band_limited(g1d, 1, 12, 11);
    CHECK_NOTHROW(assert_band_limited(ok, g1d.band_limit()));
    SpectralField hot(g1d, 1);
    hot.set_mode(0, {g1d.n / 2 - 1, 0}, 1.0);
    CHECK_THROWS_AS(assert_band_limited(hot, g1d.band_limit()), NumericalError);
}

TEST_CASE("pointwise products") {
    auto a = random_band_limited(g1d, 1, 8, 12);
    auto b = random_band_limited(g1d, 1, 8, 13);
    auto ab = pointwise_product(a, b);
    const auto sa = a.to_samples(), sb = b.to_samples(), sab = ab.to_samples();
    for (std::size_t i = 0; i < g1d.size(); ++i)
        CHECK(sab[i] == doctest::Approx(sa[i] * sb[i]).epsilon(1e-10));

    auto u = random_band_limited(g2d, 2, 6, 14);
    auto v = random_band_limited(g2d, 2, 6, 15);
    auto dot = pointwise_product(u, v);
    CHECK(dot.components() == 1);
    const auto su = u.to_samples(), sv = v.to_samples(), sd = dot.to_samples();
    for (std::size_t i = 0; i < g2d.size(); ++i) {
        const double want = su[i] * sv[i] + su[g2d.size() + i] * sv[g2d.size() + i];
        CHECK(sd[i] == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("evaluate_at_points matches grid samples and off-grid truth") {
    auto f = random_band_limited(g1d, 1, 10, 16);
    std::vector<double> pts;
    for (int i = 0; i < g1d.n; ++i) pts.push_back(g1d.length * i / g1d.n);
    const auto vals = evaluate_at_points(f, pts);
    const auto samp = f.to_samples();
    for (int i = 0; i < g1d.n; ++i) CHECK(vals[i] == doctest::Approx(samp[i]).epsilon(1e-10));

    // off-grid: single mode has closed form
    SpectralField mode(g2d, 1);
    mode.set_mode(0, {2, 3}, Complex(0.3, -0.1));
    std::vector<double> p{0.37, 1.91};
    const auto v = evaluate_at_points(mode, p);
    const Complex c = mode.mode(0, {2, 3});
    const double truth = 2.0 * (c * std::polar(1.0, 2.0 * p[0] + 3.0 * p[1])).real();
    CHECK(v[0] == doctest::Approx(truth).epsilon(1e-12));
}

TEST_CASE("snapshot round trip") {
    auto f = random_band_limited(g2d, 2, 6, 17);
    const std::string path = "/tmp/nklab_snapshot_test.csv";
    save_snapshot(path, f);
    const auto back = load_snapshot(path);
    CHECK(back.grid() == f.grid());
    CHECK(back.components() == f.components());
    CHECK((back - f).l2() <= 1e-12 * f.l2());
    std::remove(path.c_str());
}

TEST_CASE("concurrent transforms on one grid are safe") {
    // the plan cache serializes planning; execution runs concurrently
    std::vector<std::thread> workers;
    std::atomic<int> failures{0};
    for (int w = 0; w < 4; ++w)
        workers.emplace_back([&, w] {
            for (int it = 0; it < 25; ++it) {
                const auto samples = random_samples(g1d, 1, unsigned(1000 * w + it));
                const auto f = SpectralField::from_samples(g1d, samples);
                const auto back = f.to_samples();
                for (std::size_t i = 0; i < samples.size(); ++i)
                    if (std::abs(back[i] - samples[i]) > 1e-11) ++failures;
            }
        });
    for (auto& t : workers) t.join();
    CHECK(failures.load() == 0);
}

TEST_CASE("random fields are real, zero-mean, normalized") {
    auto f = random_band_limited(g2d, 1, 7, 18, 2.5);
    CHECK(std::abs(f.mean()) == 0.0);
    CHECK(f.l2() == doctest::Approx(2.5).epsilon(1e-12));
    const auto s = f.to_samples();
    const auto f2 = SpectralField::from_samples(g2d, s);
    CHECK((f2 - f).l2() <= 1e-11 * f.l2()); // real samples reproduce coefficients
    // determinism
    auto f_again = random_band_limited(g2d, 1, 7, 18, 2.5);
    CHECK((f_again - f).l2() == 0.0);
}
