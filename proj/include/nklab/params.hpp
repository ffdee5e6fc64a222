#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace nklab {

/// Physical coefficients of the nonlocal Korteweg model.
/// nu = lambda + 2 mu is the longitudinal viscosity, nu0 = min(nu, mu),
/// and ratio_M() = nu^2 / (4 kappa) governs the regime structure.
struct PhysicalParams {
    double mu = 1.0;      // shear viscosity
    double lambda = 0.0;  // second viscosity
    double kappa = 1.0;   // capillarity coefficient
    double p = 1.0;       // pressure slope P'(1)
    double epsilon = 1.0; // interaction-kernel width

    double nu() const { return lambda + 2.0 * mu; }
    double nu0() const { return nu() < mu ? nu() : mu; }
    double ratio_M() const;

    // Throws UsageError naming the offending field.
    void validate() const;
};

/// h(x) = (1 - e^{-x}) / x extended by h(0) = 1; strictly decreasing, range (0,1].
double h_decay(double x);

/// g_eps(x) = 1 - 4p/(nu^2 x) - (4 kappa / nu^2) h(eps^2 x);
/// increasing from -inf to 1 on (0, inf). The discriminant of the linearized
/// system at |xi|^2 = x is nu^2 x^2 g_eps(x).
double g_eps(double x, const PhysicalParams& P);

/// Unique root of g_eps on (0, inf). kappa == 0 degenerates to the closed
/// form 4p/nu^2. tol is relative.
double threshold_x(const PhysicalParams& P, double tol = 1e-12);

/// g_eps^{-1}(1/4) when M < 3/4, g_eps^{-1}(1 - 1/(2M)) otherwise.
double threshold_y(const PhysicalParams& P, double tol = 1e-12);

/// (gamma1, gamma2): h(gamma1) = 1/2, h(gamma2) = 1/4 when M >= 3/4;
/// h(gamma1) = 3M/4, h(gamma2) = M/2 when M < 3/4.
std::pair<double, double> gamma_pair(double M, double tol = 1e-12);

/// Unique positive root of x -> 1 - h(x)/M, i.e. h(a) = M; requires 0 < M < 1.
double root_a(double M, double tol = 1e-12);

/// m = sqrt(g_eps(y_eps)): 1/2 when M < 3/4, sqrt(1 - 1/(2M)) otherwise.
double medium_regime_m(double M);

/// Small-eps limit of x_eps: 4p/(nu^2-4kappa) if M > 1, sqrt(2p/kappa)/eps
/// if |M-1| <= 1e-9, a(M)/eps^2 if M < 1.
double threshold_asymptote(const PhysicalParams& P);

struct ThresholdReport {
    double x_eps = 0.0;
    double y_eps = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double m = 0.0;
    std::optional<double> a_M; // only when M < 1
    double asymptote = 0.0;
};

ThresholdReport threshold_report(const PhysicalParams& P, double tol = 1e-12);

/// x_eps < gamma1/eps^2 <= y_eps <= gamma2/eps^2 at the given parameters.
bool bracket_chain_holds(const PhysicalParams& P, double tol = 1e-12);

/// Largest sampled eps such that the bracket chain holds there and at every
/// smaller sampled eps. Returns 0 when it never holds.
double detect_eps0(PhysicalParams P, std::span<const double> eps_sweep);

namespace detail {
[[noreturn]] void throw_bracket_failure(double target);
}

/// Bracketing bisection for a monotone increasing f on (0, inf); bracket is
/// expanded within [2^-40, 2^80] before bisecting to relative tolerance tol.
template <class F>
double bisect_increasing(F&& f, double target, double tol) {
    constexpr double lo_limit = 9.094947017729282e-13; // 2^-40
    constexpr double hi_limit = 1.2089258196146292e24; // 2^80
    double lo = 1.0, hi = 1.0;
    while (f(lo) >= target) {
        lo *= 0.25;
        if (lo < lo_limit) detail::throw_bracket_failure(target);
    }
    while (f(hi) <= target) {
        hi *= 4.0;
        if (hi > hi_limit) detail::throw_bracket_failure(target);
    }
    while (hi - lo > tol * (hi > 1.0 ? hi : 1.0)) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // resolution floor
        (f(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace nklab
