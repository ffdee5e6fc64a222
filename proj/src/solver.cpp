#include "nklab/solver.hpp"

#include <algorithm>
#include <cmath>

#include "nklab/errors.hpp"

namespace nklab {

PressureLaw PressureLaw::gamma_law(double g) {
    PressureLaw law;
    law.P = [g](double rho) { return std::pow(rho, g) / g; };
    law.Pprime = [g](double rho) { return std::pow(rho, g - 1.0); };
    law.p = 1.0;
    return law;
}

namespace {

void truncate_band(SpectralField& f, int kmax) {
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto k = g.modes(i);
        if (std::abs(k[0]) > kmax || std::abs(k[1]) > kmax)
            for (int c = 0; c < f.components(); ++c) f.coef(c, i) = 0.0;
    }
}

SpectralField diffusion_op(const SpectralField& u, const PhysicalParams& P) {
    const auto& g = u.grid();
    SpectralField out(g, u.components());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto xi = g.wavevector(i);
        const double xi2 = xi[0] * xi[0] + xi[1] * xi[1];
        Complex du = 0.0;
        for (int c = 0; c < u.components(); ++c) du += Complex(0.0, xi[c]) * u.coef(c, i);
        for (int c = 0; c < u.components(); ++c)
            out.coef(c, i) =
                -P.mu * xi2 * u.coef(c, i) + (P.lambda + P.mu) * Complex(0.0, xi[c]) * du;
    }
    return out;
}

} // namespace

std::pair<SpectralField, SpectralField> nonlinear_terms(const FluidState& s,
                                                        const PressureLaw& law,
                                                        const PhysicalParams& P,
                                                        double vacuum_threshold) {
    const auto& g = s.q.grid();
    const std::size_t N = g.size();
    const int dim = g.dim;
    const int kmax = g.band_limit();

    const auto qs = s.q.to_samples();
    const auto us = s.u.to_samples();
    double rho_min = 1e300;
    for (double v : qs) rho_min = std::min(rho_min, 1.0 + v);
    if (rho_min < vacuum_threshold)
        throw NumericalError("nonlinear_terms: density too close to vacuum (min rho = " +
                             std::to_string(rho_min) + ")");

    // continuity: -(u.grad q + q div u) = -div(q u); divergence form conserves
    // the mean of q exactly
    std::vector<double> qu(std::size_t(dim) * N);
    for (int c = 0; c < dim; ++c)
        for (std::size_t i = 0; i < N; ++i)
            qu[std::size_t(c) * N + i] = qs[i] * us[std::size_t(c) * N + i];
    auto Nq = divergence(SpectralField::from_samples(g, qu, dim));
    Nq *= -1.0;
    truncate_band(Nq, kmax);

    // momentum: -u.grad u + K(q) grad q - I(q) A u
    std::vector<std::vector<double>> grad_u(std::size_t(dim) * dim);
    for (int a = 0; a < dim; ++a) {
        SpectralField comp(g, 1);
        for (std::size_t i = 0; i < N; ++i) comp.coef(0, i) = s.u.coef(a, i);
        for (int b = 0; b < dim; ++b)
            grad_u[std::size_t(a) * dim + b] = derivative(comp, b).to_samples();
    }
    const auto grad_q = gradient_field(s.q).to_samples();
    const auto Au = diffusion_op(s.u, P).to_samples();

    std::vector<double> nu_samples(std::size_t(dim) * N);
    const double p1 = law.Pprime(1.0);
    for (std::size_t i = 0; i < N; ++i) {
        const double rho = 1.0 + qs[i];
        const double K = p1 - law.Pprime(rho) / rho;
        const double I = qs[i] / rho;
        for (int a = 0; a < dim; ++a) {
            double advect = 0.0;
            for (int b = 0; b < dim; ++b)
                advect += us[std::size_t(b) * N + i] * grad_u[std::size_t(a) * dim + b][i];
            nu_samples[std::size_t(a) * N + i] = -advect + K * grad_q[std::size_t(a) * N + i] -
                                                 I * Au[std::size_t(a) * N + i];
        }
    }
    auto Nu = SpectralField::from_samples(g, nu_samples, dim);
    truncate_band(Nu, kmax);
    return {Nq, Nu};
}

namespace {

FluidState step_with_prop(const FluidState& s, double dt, const PhysicalParams& P,
                          const PressureLaw& law, const LinearPropagator& lin,
                          double vacuum_threshold) {
    const double before = s.q.l2() + s.u.l2();

    auto [Nq0, Nu0] = nonlinear_terms(s, law, P, vacuum_threshold);

    // predictor: exponential Euler
    FluidState mid{s.q, s.u, s.t + dt};
    lin.advance(mid.q, mid.u, dt);
    SpectralField ENq0 = Nq0, ENu0 = Nu0;
    lin.advance(ENq0, ENu0, dt);
    FluidState star{mid.q + dt * ENq0, mid.u + dt * ENu0, s.t + dt};

    // corrector: exponential Heun
    auto [Nq1, Nu1] = nonlinear_terms(star, law, P, vacuum_threshold);
    FluidState out{mid.q + 0.5 * dt * (ENq0 + Nq1), mid.u + 0.5 * dt * (ENu0 + Nu1), s.t + dt};

    const double after = out.q.l2() + out.u.l2();
    if (after > 10.0 * before + 1e-12)
        throw NumericalError("step_imex: instability detected (norm grew more than 10x)");
    return out;
}

} // namespace

FluidState step_imex(const FluidState& s, double dt, const PhysicalParams& P,
                     const PressureLaw& law, CapillaryKind kind, double vacuum_threshold) {
    if (!(dt > 0.0)) throw UsageError("step_imex: dt must be > 0");
    const LinearPropagator lin(s.q.grid(), P, kind);
    return step_with_prop(s, dt, P, law, lin, vacuum_threshold);
}

Trajectory integrate_system(FluidState s0, double T, int steps, const PhysicalParams& P,
                            const PressureLaw& law, CapillaryKind kind, int snapshot_stride,
                            double vacuum_threshold) {
    if (steps < 1) throw UsageError("integrate_system: steps must be >= 1");
    const LinearPropagator lin(s0.q.grid(), P, kind);
    Trajectory traj;
    auto snap = [&](const FluidState& s) {
        traj.q.times.push_back(s.t);
        traj.q.fields.push_back(s.q);
        traj.u.times.push_back(s.t);
        traj.u.fields.push_back(s.u);
    };
    snap(s0);
    const double dt = T / steps;
    for (int i = 0; i < steps; ++i) {
        s0 = step_with_prop(s0, dt, P, law, lin, vacuum_threshold);
        s0.t = (i + 1) * dt; // keep times exact
        if ((i + 1) % snapshot_stride == 0 || i + 1 == steps) snap(s0);
    }
    return traj;
}

namespace {

double lsq_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

Table convergence_study(const SpectralField& q0, const SpectralField& u0,
                        std::span<const double> eps_list, double T, int steps, double s,
                        PhysicalParams base, const PressureLaw& law) {
    const auto local = integrate_system({q0, u0, 0.0}, T, steps, base, law, CapillaryKind::local,
                                        std::max(1, steps / 64));
    std::vector<double> dist(eps_list.size());
    for (std::size_t r = 0; r < eps_list.size(); ++r) {
        PhysicalParams P = base;
        P.epsilon = eps_list[r];
        const auto run = integrate_system({q0, u0, 0.0}, T, steps, P, law,
                                          CapillaryKind::nonlocal, std::max(1, steps / 64));
        TimeSeriesField dq, du;
        dq.times = run.q.times;
        du.times = run.u.times;
        for (std::size_t i = 0; i < run.q.fields.size(); ++i) {
            dq.fields.push_back(run.q.fields[i] - local.q.fields[i]);
            du.fields.push_back(run.u.fields[i] - local.u.fields[i]);
        }
        dist[r] = energy_norm(dq, du, s, P.epsilon);
    }
    std::vector<double> lx(eps_list.size()), ly(eps_list.size());
    for (std::size_t r = 0; r < eps_list.size(); ++r) {
        lx[r] = std::log(eps_list[r]);
        ly[r] = std::log(std::max(dist[r], 1e-300));
    }
    const double fit = lsq_slope(lx, ly);
    Table table({"eps", "distance", "pair_order", "fit_order"});
    for (std::size_t r = 0; r < eps_list.size(); ++r) {
        const double pair =
            r == 0 ? 0.0
                   : (ly[r - 1] - ly[r]) / (lx[r - 1] - lx[r]);
        table.add_row({eps_list[r], dist[r], pair, fit});
    }
    return table;
}

double capillary_symbol_gap(double k, double eps, double kappa) {
    return kappa * (k * k + capillary_symbol(k * k, eps));
}

Table linear_convergence_study(const SpectralField& q0, const SpectralField& u0,
                               std::span<const double> eps_list, double k_probe, double T,
                               int steps, PhysicalParams base) {
    std::vector<double> gaps(eps_list.size()), dists(eps_list.size());
    const auto local = duhamel_evolve(q0, u0, nullptr, nullptr, T, steps, base,
                                      CapillaryKind::local);
    for (std::size_t r = 0; r < eps_list.size(); ++r) {
        PhysicalParams P = base;
        P.epsilon = eps_list[r];
        gaps[r] = capillary_symbol_gap(k_probe, P.epsilon, P.kappa);
        const auto run =
            duhamel_evolve(q0, u0, nullptr, nullptr, T, steps, P, CapillaryKind::nonlocal);
        double d = 0.0;
        for (std::size_t i = 0; i < run.q.fields.size(); ++i) {
            d = std::max(d, (run.q.fields[i] - local.q.fields[i]).l2() +
                                (run.u.fields[i] - local.u.fields[i]).l2());
        }
        dists[r] = d;
    }
    Table table({"eps", "symbol_gap", "gap_order", "traj_distance", "traj_order"});
    auto order_at = [&](const std::vector<double>& v, std::size_t r) {
        if (r == 0) return 0.0;
        return (std::log(v[r - 1]) - std::log(v[r])) /
               (std::log(eps_list[r - 1]) - std::log(eps_list[r]));
    };
    for (std::size_t r = 0; r < eps_list.size(); ++r)
        table.add_row({eps_list[r], gaps[r], order_at(gaps, r), dists[r], order_at(dists, r)});
    return table;
}

} // namespace nklab
