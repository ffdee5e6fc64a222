#include "nklab/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nklab/errors.hpp"

namespace nklab {

double PhysicalParams::ratio_M() const {
    if (kappa <= 0.0) throw UsageError("params.kappa must be > 0 to form nu^2/(4 kappa)");
    return nu() * nu() / (4.0 * kappa);
}

void PhysicalParams::validate() const {
    auto bad = [](const std::string& field) { throw UsageError("params." + field + " out of range"); };
    if (!(mu > 0.0) || !std::isfinite(mu)) bad("mu");
    if (!std::isfinite(lambda)) bad("lambda");
    if (!(nu() > 0.0)) bad("lambda"); // nu = lambda + 2 mu must stay positive
    if (!(kappa > 0.0) || !std::isfinite(kappa)) bad("kappa");
    if (!(p > 0.0) || !std::isfinite(p)) bad("p");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) bad("epsilon");
}

namespace detail {
void throw_bracket_failure(double target) {
    throw NumericalError("bisect_increasing: could not bracket target " + std::to_string(target) +
                         " within [2^-40, 2^80]");
}
} // namespace detail

double h_decay(double x) {
    if (x < 0.0) throw std::domain_error("h_decay: negative argument");
    if (x < 1e-8) return 1.0 - 0.5 * x + x * x / 6.0; // cancellation guard
    return -std::expm1(-x) / x;
}

double g_eps(double x, const PhysicalParams& P) {
    if (!(x > 0.0)) throw std::domain_error("g_eps: argument must be > 0");
    const double nu2 = P.nu() * P.nu();
    const double e2 = P.epsilon * P.epsilon;
    return 1.0 - 4.0 * P.p / (nu2 * x) - (4.0 * P.kappa / nu2) * h_decay(e2 * x);
}

double threshold_x(const PhysicalParams& P, double tol) {
    if (P.kappa == 0.0) return 4.0 * P.p / (P.nu() * P.nu());
    return bisect_increasing([&](double x) { return g_eps(x, P); }, 0.0, tol);
}

double threshold_y(const PhysicalParams& P, double tol) {
    const double M = P.ratio_M();
    const double target = (M < 0.75) ? 0.25 : 1.0 - 1.0 / (2.0 * M);
    return bisect_increasing([&](double x) { return g_eps(x, P); }, target, tol);
}

namespace {
// h is strictly decreasing from 1 to 0, so 1 - h is increasing.
double h_inverse(double level, double tol) {
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("h_inverse: level must be in (0,1)");
    return bisect_increasing([](double x) { return 1.0 - h_decay(x); }, 1.0 - level, tol);
}
} // namespace

std::pair<double, double> gamma_pair(double M, double tol) {
    if (!(M > 0.0)) throw std::domain_error("gamma_pair: M must be > 0");
    if (M >= 0.75) return {h_inverse(0.5, tol), h_inverse(0.25, tol)};
    return {h_inverse(0.75 * M, tol), h_inverse(0.5 * M, tol)};
}

double root_a(double M, double tol) {
    if (!(M > 0.0 && M < 1.0)) throw std::domain_error("root_a: M must lie in (0,1)");
    return h_inverse(M, tol);
}

double medium_regime_m(double M) {
    if (!(M > 0.0)) throw std::domain_error("medium_regime_m: M must be > 0");
    return (M < 0.75) ? 0.5 : std::sqrt(1.0 - 1.0 / (2.0 * M));
}

double threshold_asymptote(const PhysicalParams& P) {
    const double M = P.ratio_M();
    if (std::abs(M - 1.0) <= 1e-9) return std::sqrt(2.0 * P.p / P.kappa) / P.epsilon;
    if (M > 1.0) return 4.0 * P.p / (P.nu() * P.nu() - 4.0 * P.kappa);
    return root_a(M) / (P.epsilon * P.epsilon);
}

ThresholdReport threshold_report(const PhysicalParams& P, double tol) {
    ThresholdReport r;
    const double M = P.ratio_M();
    r.x_eps = threshold_x(P, tol);
    r.y_eps = threshold_y(P, tol);
    auto [g1, g2] = gamma_pair(M, tol);
    r.gamma1 = g1;
    r.gamma2 = g2;
    r.m = medium_regime_m(M);
    if (M < 1.0) r.a_M = root_a(M, tol);
    r.asymptote = threshold_asymptote(P);
    return r;
}

bool bracket_chain_holds(const PhysicalParams& P, double tol) {
    const ThresholdReport r = threshold_report(P, tol);
    const double e2 = P.epsilon * P.epsilon;
    return r.x_eps < r.gamma1 / e2 && r.gamma1 / e2 <= r.y_eps && r.y_eps <= r.gamma2 / e2;
}

double detect_eps0(PhysicalParams P, std::span<const double> eps_sweep) {
    std::vector<double> eps(eps_sweep.begin(), eps_sweep.end());
    std::sort(eps.begin(), eps.end()); // ascending
    double eps0 = 0.0;
    for (double e : eps) {
        P.epsilon = e;
        if (!bracket_chain_holds(P)) break;
        eps0 = e;
    }
    return eps0;
}

} // namespace nklab
