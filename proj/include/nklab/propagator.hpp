#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "nklab/littlewood_paley.hpp"
#include "nklab/params.hpp"
#include "nklab/spectral.hpp"
#include "nklab/table.hpp"

namespace nklab {

enum class CapillaryKind { nonlocal, local };
enum class Regime { oscillatory, degenerate, real_roots };

/// Per-wavevector data of the compressible 2x2 block
///   d/dt (q,v) = A(xi) (q,v),  A = [[0, -|xi|], [b |xi|, -nu |xi|^2]],
/// with b = p + kappa (1-e^{-eps^2 |xi|^2})/eps^2 (nonlocal) or p + kappa |xi|^2
/// (local). g = 1 - 4 b / (nu^2 |xi|^2) carries the discriminant sign;
/// |g| < 1e-8 is treated as the double-root regime.
struct ModeSymbol {
    double xi = 0.0;
    double b = 0.0;
    double g = 0.0;
    double discriminant = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    double S = 0.0;           // sqrt(-g) in the oscillatory regime
    double R = 0.0;           // sqrt(g) in the real regime
    double one_minus_R = 0.0; // (4b/(nu^2 xi^2))/(1+R): keeps the digits the
                              // raw subtraction 1-R would lose near R = 1
    Regime regime = Regime::oscillatory;
    std::complex<double> lambda_plus;
    std::complex<double> lambda_minus;
};

ModeSymbol mode_symbol(double xi_norm, const PhysicalParams& P,
                       CapillaryKind kind = CapillaryKind::nonlocal);

/// e^{tA} entries; exact and continuous across the regime switch.
struct Prop2 {
    double q_q, q_v, v_q, v_v;
};
Prop2 propagator_matrix(const ModeSymbol& sym, double t);

struct ModeState {
    std::complex<double> q;
    std::complex<double> v;
    std::vector<std::complex<double>> w; // incompressible part, heat-evolved
};

ModeState evolve_mode(const ModeState& s0, const ModeSymbol& sym, double t);

/// |b - (nu^2 |xi|^2 / 4)(1-R)(1+R)| / b; real regime only.
double velocity_identity_residual(const ModeSymbol& sym);

/// Exact linear flow of the full (q, u) system on a grid: Helmholtz split,
/// closed-form 2x2 propagation of (q, v), heat factor on w, recompose.
class LinearPropagator {
public:
    LinearPropagator(const PeriodicGrid& g, const PhysicalParams& P, CapillaryKind kind);
    void advance(SpectralField& q, SpectralField& u, double dt) const;
    const PhysicalParams& params() const { return params_; }

private:
    PeriodicGrid grid_;
    PhysicalParams params_;
    std::vector<ModeSymbol> syms_;
};

using TimeField = std::function<SpectralField(double)>; // may be empty (zero forcing)

struct LinearTrajectory {
    TimeSeriesField q;
    TimeSeriesField u;
};

/// Solve d/dt q + div u = F, d/dt u - A u + p grad q - cap grad term = G
/// exactly per mode plus a per-step 4-point Gauss Duhamel quadrature.
LinearTrajectory duhamel_evolve(const SpectralField& q0, const SpectralField& u0,
                                const TimeField& F, const TimeField& G, double T, int steps,
                                const PhysicalParams& P,
                                CapillaryKind kind = CapillaryKind::nonlocal);

/// Fitted envelope constants of the pointwise regime estimates.
/// Rows: (j, eps, regime, target, fitted_C, argmax_t, cells).
Table verify_pointwise_bounds(const PhysicalParams& P, int j_lo, int j_hi, int n_xi = 9,
                              int n_t = 48);

/// Fitted constants of the per-block time-integrated estimates.
/// Rows: (j, eps, side, jbar0, fitted_C, slow_rate).
Table verify_time_estimates(const PhysicalParams& P, int j_lo, int j_hi, int n_xi = 17,
                            int n_t = 3000);

/// Tail decay rate of |q(t)| for data (q0,v0)=(1,0), by log slope.
double q_tail_damping_rate(const PhysicalParams& P, double xi_norm);

} // namespace nklab
