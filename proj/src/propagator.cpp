#include "nklab/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "nklab/errors.hpp"

namespace nklab {

namespace {
constexpr double degenerate_window = 1e-8;

double sinc(double x) { return std::abs(x) < 1e-6 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
double sinhc(double x) { return std::abs(x) < 1e-6 ? 1.0 + x * x / 6.0 : std::sinh(x) / x; }
} // namespace

ModeSymbol mode_symbol(double xi_norm, const PhysicalParams& P, CapillaryKind kind) {
    if (!(xi_norm > 0.0)) throw std::domain_error("mode_symbol: |xi| must be > 0");
    ModeSymbol s;
    s.xi = xi_norm;
    s.nu = P.nu();
    s.mu = P.mu;
    const double xi2 = xi_norm * xi_norm;
    if (kind == CapillaryKind::nonlocal) {
        const double e2 = P.epsilon * P.epsilon;
        s.b = P.p - P.kappa * std::expm1(-e2 * xi2) / e2;
    } else {
        s.b = P.p + P.kappa * xi2;
    }
    s.g = 1.0 - 4.0 * s.b / (s.nu * s.nu * xi2);
    s.discriminant = s.nu * s.nu * xi2 * xi2 * s.g;
    const double c = 0.5 * s.nu * xi2;
    if (s.g < -degenerate_window) {
        s.regime = Regime::oscillatory;
        s.S = std::sqrt(-s.g);
        s.lambda_plus = {-c, -c * s.S};
        s.lambda_minus = {-c, c * s.S};
    } else if (s.g > degenerate_window) {
        s.regime = Regime::real_roots;
        s.R = std::sqrt(s.g);
        s.one_minus_R = (4.0 * s.b / (s.nu * s.nu * xi2)) / (1.0 + s.R);
        s.lambda_plus = {-c * (1.0 + s.R), 0.0};
        s.lambda_minus = {-c * s.one_minus_R, 0.0};
    } else {
        s.regime = Regime::degenerate;
        s.lambda_plus = s.lambda_minus = {-c, 0.0};
    }
    return s;
}

Prop2 propagator_matrix(const ModeSymbol& sym, double t) {
    if (t < 0.0) throw std::domain_error("propagator_matrix: t must be >= 0");
    const double c = 0.5 * sym.nu * sym.xi * sym.xi;
    const double E0 = std::exp(-c * t);
    switch (sym.regime) {
        case Regime::oscillatory: {
            const double theta = c * t * sym.S;
            const double sc = sinc(theta);
            return {E0 * (std::cos(theta) + c * t * sc), -sym.xi * t * E0 * sc,
                    sym.b * sym.xi * t * E0 * sc, E0 * (std::cos(theta) - c * t * sc)};
        }
        case Regime::real_roots: {
            const double theta = c * t * sym.R;
            if (theta < 1e-3) {
                const double sc = sinhc(theta);
                return {E0 * (std::cosh(theta) + c * t * sc), -sym.xi * t * E0 * sc,
                        sym.b * sym.xi * t * E0 * sc, E0 * (std::cosh(theta) - c * t * sc)};
            }
            // both exponents are <= 0; no overflow, no cancellation
            const double ep = std::exp(-c * t * (1.0 + sym.R));   // e^{t lambda_+}
            const double em = std::exp(-c * t * sym.one_minus_R); // e^{t lambda_-}
            const double half_sum = 0.5 * (ep + em);
            const double diff_over_R = 0.5 * (em - ep) / sym.R;
            return {half_sum + diff_over_R, -sym.xi * (em - ep) / (2.0 * c * sym.R),
                    sym.b * sym.xi * (em - ep) / (sym.nu * sym.xi * sym.xi * sym.R),
                    half_sum - diff_over_R};
        }
        case Regime::degenerate:
            return {E0 * (1.0 + c * t), -sym.xi * t * E0, sym.b * sym.xi * t * E0,
                    E0 * (1.0 - c * t)};
    }
    throw NumericalError("propagator_matrix: unreachable");
}

ModeState evolve_mode(const ModeState& s0, const ModeSymbol& sym, double t) {
    const Prop2 P = propagator_matrix(sym, t);
    ModeState out;
    out.q = P.q_q * s0.q + P.q_v * s0.v;
    out.v = P.v_q * s0.q + P.v_v * s0.v;
    const double heat = std::exp(-sym.mu * sym.xi * sym.xi * t);
    out.w.reserve(s0.w.size());
    for (const auto& w : s0.w) out.w.push_back(heat * w);
    return out;
}

double velocity_identity_residual(const ModeSymbol& sym) {
    if (sym.regime != Regime::real_roots)
        throw std::domain_error("velocity_identity_residual: real regime required");
    const double rhs =
        0.25 * sym.nu * sym.nu * sym.xi * sym.xi * sym.one_minus_R * (1.0 + sym.R);
    return std::abs(sym.b - rhs) / sym.b;
}

LinearPropagator::LinearPropagator(const PeriodicGrid& g, const PhysicalParams& P,
                                   CapillaryKind kind)
    : grid_(g), params_(P), syms_(g.size()) {
    for (std::size_t i = 1; i < g.size(); ++i)
        syms_[i] = mode_symbol(std::sqrt(g.xi_norm2(i)), P, kind);
}

void LinearPropagator::advance(SpectralField& q, SpectralField& u, double dt) const {
    if (!(q.grid() == grid_) || !(u.grid() == grid_))
        throw UsageError("LinearPropagator: grid mismatch");
    const std::size_t N = grid_.size();
    for (std::size_t i = 1; i < N; ++i) {
        const auto xi = grid_.wavevector(i);
        const double norm = std::sqrt(grid_.xi_norm2(i));
        Complex vh, wh(0.0);
        if (grid_.dim == 1) {
            vh = Complex(0.0, xi[0] / norm) * u.coef(0, i);
        } else {
            vh = Complex(0.0, 1.0 / norm) * (xi[0] * u.coef(0, i) + xi[1] * u.coef(1, i));
            wh = Complex(0.0, 1.0 / norm) * (xi[0] * u.coef(1, i) - xi[1] * u.coef(0, i));
        }
        const Prop2 M = propagator_matrix(syms_[i], dt);
        const Complex qn = M.q_q * q.coef(0, i) + M.q_v * vh;
        const Complex vn = M.v_q * q.coef(0, i) + M.v_v * vh;
        const Complex wn = std::exp(-params_.mu * norm * norm * dt) * wh;
        q.coef(0, i) = qn;
        if (grid_.dim == 1) {
            u.coef(0, i) = Complex(0.0, -xi[0] / norm) * vn;
        } else {
            u.coef(0, i) = Complex(0.0, -xi[0] / norm) * vn + Complex(0.0, xi[1] / norm) * wn;
            u.coef(1, i) = Complex(0.0, -xi[1] / norm) * vn + Complex(0.0, -xi[0] / norm) * wn;
        }
    }
}

namespace {

struct GaussNode {
    double x, w;
};
// 4-point Gauss-Legendre on [0,1]
constexpr GaussNode kGauss4[4] = {{0.06943184420297371, 0.17392742256872693},
                                  {0.33000947820757187, 0.32607257743127305},
                                  {0.66999052179242813, 0.32607257743127305},
                                  {0.93056815579757184, 0.17392742256872693}};

} // namespace

LinearTrajectory duhamel_evolve(const SpectralField& q0, const SpectralField& u0,
                                const TimeField& F, const TimeField& G, double T, int steps,
                                const PhysicalParams& P, CapillaryKind kind) {
    const auto& g = q0.grid();
    if (!(u0.grid() == g)) throw UsageError("duhamel_evolve: grid mismatch");
    if (u0.components() != g.dim) throw UsageError("duhamel_evolve: u0 must be a vector field");
    if (std::abs(q0.mean()) > 1e-13 * (1.0 + q0.l2()))
        throw UsageError("duhamel_evolve: q0 must be zero-mean");
    if (steps < 1) throw UsageError("duhamel_evolve: steps must be >= 1");

    const std::size_t N = g.size();
    std::vector<ModeSymbol> syms(N);
    for (std::size_t i = 1; i < N; ++i) syms[i] = mode_symbol(std::sqrt(g.xi_norm2(i)), P, kind);

    auto parts = helmholtz_split(u0);
    std::vector<Complex> qh(N), vh(N), wh(N);
    for (std::size_t i = 0; i < N; ++i) {
        qh[i] = q0.coef(0, i);
        vh[i] = parts.v.coef(0, i);
        wh[i] = parts.w.coef(0, i);
    }

    LinearTrajectory out;
    auto snapshot = [&](double t) {
        SpectralField qf(g, 1), vf(g, 1), wf(g, 1);
        for (std::size_t i = 0; i < N; ++i) {
            qf.coef(0, i) = qh[i];
            vf.coef(0, i) = vh[i];
            wf.coef(0, i) = wh[i];
        }
        out.q.times.push_back(t);
        out.q.fields.push_back(qf);
        out.u.times.push_back(t);
        out.u.fields.push_back(helmholtz_recompose(vf, wf, g.dim));
    };
    // TimeSeriesField wants strictly increasing times; shift t=0 is fine
    snapshot(0.0);

    const double dt = T / steps;
    const bool has_F = bool(F), has_G = bool(G);
    std::vector<Complex> fq(N), fv(N), fw(N);
    for (int step = 0; step < steps; ++step) {
        const double t_now = step * dt;
        // exact homogeneous flow over dt
        for (std::size_t i = 1; i < N; ++i) {
            const Prop2 M = propagator_matrix(syms[i], dt);
            const Complex qn = M.q_q * qh[i] + M.q_v * vh[i];
            const Complex vn = M.v_q * qh[i] + M.v_v * vh[i];
            qh[i] = qn;
            vh[i] = vn;
            wh[i] *= std::exp(-P.mu * g.xi_norm2(i) * dt);
        }
        // Duhamel increment: sum_k w_k P((1-x_k) dt) force(t + x_k dt)
        if (has_F || has_G) {
            for (const auto& node : kGauss4) {
                const double s = t_now + node.x * dt;
                const double lag = (1.0 - node.x) * dt;
                std::fill(fq.begin(), fq.end(), Complex(0.0));
                std::fill(fv.begin(), fv.end(), Complex(0.0));
                std::fill(fw.begin(), fw.end(), Complex(0.0));
                if (has_F) {
                    const SpectralField Fs = F(s);
                    for (std::size_t i = 0; i < N; ++i) fq[i] = Fs.coef(0, i);
                }
                if (has_G) {
                    const SpectralField Gs = G(s);
                    for (std::size_t i = 1; i < N; ++i) {
                        const auto xi = g.wavevector(i);
                        const double norm = std::sqrt(g.xi_norm2(i));
                        if (g.dim == 1) {
                            fv[i] = Complex(0.0, xi[0] / norm) * Gs.coef(0, i);
                        } else {
                            fv[i] = Complex(0.0, 1.0 / norm) *
                                    (xi[0] * Gs.coef(0, i) + xi[1] * Gs.coef(1, i));
                            fw[i] = Complex(0.0, 1.0 / norm) *
                                    (xi[0] * Gs.coef(1, i) - xi[1] * Gs.coef(0, i));
                        }
                    }
                }
                for (std::size_t i = 1; i < N; ++i) {
                    const Prop2 M = propagator_matrix(syms[i], lag);
                    qh[i] += node.w * dt * (M.q_q * fq[i] + M.q_v * fv[i]);
                    vh[i] += node.w * dt * (M.v_q * fq[i] + M.v_v * fv[i]);
                    wh[i] += node.w * dt * std::exp(-P.mu * g.xi_norm2(i) * lag) * fw[i];
                }
            }
        }
        snapshot((step + 1) * dt);
    }
    return out;
}

Table verify_pointwise_bounds(const PhysicalParams& P, int j_lo, int j_hi, int n_xi, int n_t) {
    P.validate();
    const double x_eps = threshold_x(P);
    const double y_eps = threshold_y(P);
    const double M = P.ratio_M();
    const double m = medium_regime_m(M);
    const auto [gamma1, gamma2] = gamma_pair(M);
    (void)gamma2;
    const double nu = P.nu();
    const double sp = std::sqrt(P.p);
    const double c0 = DyadicPartition::c0;

    Table table({"j", "eps", "regime", "target", "fitted_C", "argmax_t", "cells"});
    for (int j = j_lo; j <= j_hi; ++j) {
        const double two_j = std::exp2(double(j));
        const double base_rate = nu * c0 * c0 * two_j * two_j / 4.0;
        struct Fit {
            double c = 0.0, argt = 0.0;
            long long cells = 0;
        };
        Fit fits[3][2]; // [regime][target: 0=q, 1=v]
        for (int ix = 0; ix < n_xi; ++ix) {
            const double lo = c0 * two_j * (1.0 + 1e-9);
            const double hi = DyadicPartition::C0 * two_j * (1.0 - 1e-9);
            const double xi = lo + (hi - lo) * ix / std::max(1, n_xi - 1);
            const auto sym = mode_symbol(xi, P);
            const double xi2 = xi * xi;
            const int regime = xi2 < x_eps ? 0 : (xi2 < y_eps ? 1 : 2);
            for (int it = 0; it < n_t; ++it) {
                // dimensionless decay phases in [0, 24]
                const double phase = 24.0 * it / (n_t - 1);
                const double t = phase / base_rate;
                const Prop2 Pm = propagator_matrix(sym, t);
                for (int data = 0; data < 2; ++data) {
                    const double q0 = data == 0 ? 1.0 : 0.0;
                    const double v0 = 1.0 - q0;
                    const double qt = std::abs(Pm.q_q * q0 + Pm.q_v * v0);
                    const double vt = std::abs(Pm.v_q * q0 + Pm.v_v * v0);
                    double env_q, env_v, lhs_q, lhs_v;
                    const double data_q = (1.0 + nu * two_j) * q0 + (1.0 + 1.0 / sp) * v0;
                    if (regime == 0) {
                        const double decay = std::exp(-base_rate * t);
                        lhs_q = (1.0 + nu * two_j) * qt;
                        env_q = decay * data_q;
                        lhs_v = vt;
                        env_v = decay * ((1.0 + nu * two_j) * (1.0 + sp) *
                                             (1.0 + 4.0 * P.kappa / (nu * nu)) * q0 +
                                         v0);
                    } else if (regime == 1) {
                        const double decay = std::exp(-base_rate * (1.0 - m) * t) / (1.0 - m);
                        lhs_q = (1.0 + nu * two_j) * qt;
                        env_q = decay * data_q;
                        lhs_v = vt;
                        env_v = decay * (nu * two_j * q0 + v0);
                    } else {
                        const double slow = std::exp(-P.kappa / (nu * P.epsilon * P.epsilon) *
                                                     (1.0 - std::exp(-gamma1)) * t);
                        lhs_q = (1.0 + nu * two_j) * qt;
                        env_q = (std::exp(-0.5 * nu * xi2 * t) + slow) * data_q;
                        // g at the annulus corners; clamped at 0 in threshold blocks
                        const double glo =
                            std::max(0.0, g_eps(c0 * c0 * two_j * two_j, P));
                        const double ghi = std::max(
                            0.0, g_eps(DyadicPartition::C0 * DyadicPartition::C0 * two_j * two_j, P));
                        const double env2 =
                            (1.0 - std::sqrt(glo)) *
                            std::exp(-0.5 * nu * c0 * c0 * two_j * two_j * t * (1.0 - std::sqrt(ghi)));
                        lhs_v = vt;
                        env_v = (std::exp(-base_rate * t) + env2) * (nu * two_j * q0 + v0);
                    }
                    auto update = [&](Fit& f, double lhs, double env) {
                        if (env <= 0.0) return;
                        const double c = lhs / env;
                        ++f.cells;
                        if (c > f.c) {
                            f.c = c;
                            f.argt = t;
                        }
                    };
                    update(fits[regime][0], lhs_q, env_q);
                    update(fits[regime][1], lhs_v, env_v);
                }
            }
        }
        static const char* regime_names[3] = {"low", "medium", "high"};
        static const char* target_names[2] = {"q", "v"};
        for (int r = 0; r < 3; ++r)
            for (int tgt = 0; tgt < 2; ++tgt)
                if (fits[r][tgt].cells > 0)
                    table.add_row({(long long)j, P.epsilon, std::string(regime_names[r]),
                                   std::string(target_names[tgt]), fits[r][tgt].c,
                                   fits[r][tgt].argt, fits[r][tgt].cells});
    }
    return table;
}

Table verify_time_estimates(const PhysicalParams& P, int j_lo, int j_hi, int n_xi, int n_t) {
    P.validate();
    const double y_eps = threshold_y(P);
    const double M = P.ratio_M();
    const double nu = P.nu();
    const double sp = std::sqrt(P.p);
    const int jbar0 = int(std::floor(std::log2(std::sqrt(y_eps) / DyadicPartition::c0)));

    Table table({"j", "eps", "side", "jbar0", "fitted_C", "slow_rate"});
    for (int j = j_lo; j <= j_hi; ++j) {
        const double two_j = std::exp2(double(j));
        std::vector<ModeSymbol> syms;
        double slow_rate = 1e300, fast_rate = 0.0;
        for (int ix = 0; ix < n_xi; ++ix) {
            const double lo = DyadicPartition::c0 * two_j * (1.0 + 1e-9);
            const double hi = DyadicPartition::C0 * two_j * (1.0 - 1e-9);
            const double xi = lo + (hi - lo) * ix / std::max(1, n_xi - 1);
            syms.push_back(mode_symbol(xi, P));
            const auto& s = syms.back();
            slow_rate = std::min({slow_rate, -s.lambda_plus.real(), -s.lambda_minus.real()});
            fast_rate = std::max({fast_rate, -s.lambda_plus.real(), -s.lambda_minus.real()});
        }
        // geometric time grid: the parabolic transient (rate ~ nu xi^2) and
        // the slow damping branch can be many decades apart
        const double T = 50.0 / slow_rate;
        const double t1 = 0.02 / fast_rate;
        std::vector<double> times(n_t);
        times[0] = 0.0;
        const double ratio = std::pow(T / t1, 1.0 / double(n_t - 2));
        for (int it = 1; it < n_t; ++it) times[it] = t1 * std::pow(ratio, double(it - 1));
        double fitted = 0.0;
        for (int data = 0; data < 2; ++data) {
            const double q0 = data == 0 ? 1.0 : 0.0;
            const double v0 = 1.0 - q0;
            double q_sup = 0.0, v_sup = 0.0, q_l1 = 0.0, v_l1 = 0.0;
            double prev_q = 0.0, prev_v = 0.0;
            for (int it = 0; it < n_t; ++it) {
                const double t = times[it];
                double q2 = 0.0, v2 = 0.0;
                for (const auto& s : syms) {
                    const Prop2 Pm = propagator_matrix(s, t);
                    const double qt = Pm.q_q * q0 + Pm.q_v * v0;
                    const double vt = Pm.v_q * q0 + Pm.v_v * v0;
                    q2 += qt * qt;
                    v2 += vt * vt;
                }
                const double qn = std::sqrt(q2 / syms.size());
                const double vn = std::sqrt(v2 / syms.size());
                q_sup = std::max(q_sup, qn);
                v_sup = std::max(v_sup, vn);
                if (it > 0) {
                    const double dt = times[it] - times[it - 1];
                    q_l1 += 0.5 * (qn + prev_q) * dt;
                    v_l1 += 0.5 * (vn + prev_v) * dt;
                }
                prev_q = qn;
                prev_v = vn;
            }
            const double q_weight =
                j <= jbar0 ? nu * two_j * two_j : nu / (P.epsilon * P.epsilon);
            const double lhs = v_sup + nu * two_j * two_j * v_l1 +
                               (1.0 + nu * two_j) * (q_sup + q_weight * q_l1);
            const double rhs =
                j <= jbar0
                    ? std::max(1.0 / M, M * M) *
                          ((1.0 + nu * two_j) * (1.0 + sp) * q0 + (1.0 + 1.0 / sp) * v0)
                    : std::max(1.0, M) * ((1.0 + nu * two_j) * q0 + (1.0 + 1.0 / sp) * v0);
            fitted = std::max(fitted, lhs / rhs);
        }
        table.add_row({(long long)j, P.epsilon, std::string(j <= jbar0 ? "low" : "high"),
                       (long long)jbar0, fitted, slow_rate});
    }
    return table;
}

double q_tail_damping_rate(const PhysicalParams& P, double xi_norm) {
    const auto sym = mode_symbol(xi_norm, P);
    const double slow = std::min(-sym.lambda_plus.real(), -sym.lambda_minus.real());
    const double t1 = 5.0 / slow, t2 = 10.0 / slow;
    const double a1 = std::abs(propagator_matrix(sym, t1).q_q);
    const double a2 = std::abs(propagator_matrix(sym, t2).q_q);
    if (a1 <= 0.0 || a2 <= 0.0) throw NumericalError("q_tail_damping_rate: tail underflow");
    return std::log(a1 / a2) / (t2 - t1);
}

} // namespace nklab
