#pragma once

#include <functional>
#include <span>
#include <utility>

#include "nklab/littlewood_paley.hpp"
#include "nklab/params.hpp"
#include "nklab/propagator.hpp"
#include "nklab/spectral.hpp"
#include "nklab/table.hpp"

namespace nklab {

struct PressureLaw {
    std::function<double(double)> P;      // P(rho)
    std::function<double(double)> Pprime; // P'(rho)
    double p = 1.0;                       // P'(1)

    /// P(rho) = rho^g / g; only P'(1) = 1 enters the linear part.
    static PressureLaw gamma_law(double g);
};

struct FluidState {
    SpectralField q; // density fluctuation, rho = 1 + q
    SpectralField u; // velocity
    double t = 0.0;
};

/// (-div((1+q)u) + div u, -u.grad u + K(q) grad q - I(q) A u) with
/// K(q) = P'(1) - P'(1+q)/(1+q), I(q) = q/(1+q); all products dealiased to
/// |k| <= n/3. Throws NumericalError when min(1+q) < vacuum_threshold.
std::pair<SpectralField, SpectralField> nonlinear_terms(const FluidState& s,
                                                        const PressureLaw& law,
                                                        const PhysicalParams& P,
                                                        double vacuum_threshold = 0.1);

/// One IMEX step: the linear part (pressure + viscosity + capillarity) is
/// advanced exactly per mode, the nonlinear terms by an exponential
/// Heun corrector; second order in dt on smooth data.
FluidState step_imex(const FluidState& s, double dt, const PhysicalParams& P,
                     const PressureLaw& law, CapillaryKind kind,
                     double vacuum_threshold = 0.1);

struct Trajectory {
    TimeSeriesField q;
    TimeSeriesField u;
};

Trajectory integrate_system(FluidState s0, double T, int steps, const PhysicalParams& P,
                            const PressureLaw& law, CapillaryKind kind,
                            int snapshot_stride = 1, double vacuum_threshold = 0.1);

/// Runs the local system once and the nonlocal system per eps; the distance
/// is the E_eps^s norm of the difference trajectory.
/// Columns: (eps, distance, pair_order, fit_order).
Table convergence_study(const SpectralField& q0, const SpectralField& u0,
                        std::span<const double> eps_list, double T, int steps, double s,
                        PhysicalParams base, const PressureLaw& law);

/// kappa (k^2 - (1 - e^{-eps^2 k^2})/eps^2): the Taylor gap of the capillary
/// symbols at a fixed mode; order exactly 2 in eps.
double capillary_symbol_gap(double k, double eps, double kappa);

/// Fixed-band linear diagnostics: per eps the symbol gap at mode k_probe and
/// the sup-in-time L2 distance between the nonlocal and local linear flows.
/// Columns: (eps, symbol_gap, gap_order, traj_distance, traj_order).
Table linear_convergence_study(const SpectralField& q0, const SpectralField& u0,
                               std::span<const double> eps_list, double k_probe, double T,
                               int steps, PhysicalParams base);

} // namespace nklab
