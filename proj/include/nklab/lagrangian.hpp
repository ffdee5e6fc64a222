#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nklab/littlewood_paley.hpp"
#include "nklab/params.hpp"
#include "nklab/spectral.hpp"
#include "nklab/table.hpp"

namespace nklab {

using Vec2 = std::array<double, 2>;

/// Static-in-time advecting velocity, either closed-form (constant, linear,
/// rotation, sinusoidal shear) or a band-limited field mollified at level j
/// (the low-pass S_{j-1} v). Closed-form velocities may be non-periodic; flow
/// integration still works for those, but composition with torus fields does
/// not, and the flow is marked accordingly.
class AdvectingVelocity {
public:
    static AdvectingVelocity constant(int dim, Vec2 a);
    static AdvectingVelocity linear_1d(double rate);  // v(x) = rate * x
    static AdvectingVelocity rotation(double omega);  // (-omega x2, omega x1)
    /// v = A sin(k0 x) in 1D, (A sin(k0 x2), 0) in 2D; periodic.
    static AdvectingVelocity sinusoidal_shear(const PeriodicGrid& g, double amplitude);
    /// S_{j-1} v = chi(2^{-(j-1)}|xi|) v; evaluation by exact Fourier summation.
    static AdvectingVelocity from_field(const SpectralField& v, int mollify_level);

    int dim() const { return dim_; }
    bool periodic() const { return periodic_; }
    double grad_sup() const { return grad_sup_; }

    /// Velocity and divergence at a batch of points (layout as evaluate_at_points).
    void eval_batch(std::span<const double> points, std::vector<double>& vel,
                    std::vector<double>& div) const;

private:
    AdvectingVelocity() = default;
    int dim_ = 1;
    bool periodic_ = true;
    double grad_sup_ = 0.0;
    // closed-form case
    std::function<Vec2(Vec2)> eval_;
    std::function<double(Vec2)> div_;
    // spectral case
    std::optional<SpectralField> field_;
    std::optional<SpectralField> div_field_;
};

/// Discrete flow of a static velocity: forward and inverse displacement
/// fields sampled on the grid, plus the divergence integrals along the
/// characteristics (so det(D psi) = e^{divint} is available exactly).
struct FlowMap {
    PeriodicGrid grid;
    int dim = 1;
    double t = 0.0;
    double V = 0.0; // t * ||grad v||_Linf of the integrated (mollified) field
    bool periodic = true;
    int substeps = 1;
    std::vector<double> disp_fwd;    // psi(x) - x, component-major
    std::vector<double> disp_inv;    // psi^{-1}(x) - x
    std::vector<double> divint_fwd;  // int_0^t (div v)(tau, psi_tau(x)) dtau
    std::vector<double> divint_inv;  // -int_0^t (div v)(tau, X(tau,t,x)) dtau

    Vec2 point(std::size_t i) const;
    Vec2 forward(std::size_t i) const;
    Vec2 inverse(std::size_t i) const;
};

/// Classical RK4 on the characteristic ODE per grid point (augmented with the
/// divergence integral); the inverse map integrates backward from t to 0.
FlowMap integrate_flow(const AdvectingVelocity& v, const PeriodicGrid& g, double t, int substeps);

/// psi^{-1} at an arbitrary point, by Fourier evaluation of the inverse
/// displacement (periodic flows only).
Vec2 apply_inverse(const FlowMap& flow, Vec2 x);

struct JacobianPair {
    std::vector<double> finite_difference; // NaN where the stencil is invalid
    std::vector<double> divergence_formula;
};

/// det(D psi) two ways: 6th-order finite differences of the displacement vs
/// the exponential of the divergence integral. Non-periodic flows get the
/// finite-difference value only away from the seam.
JacobianPair jacobian_det(const FlowMap& flow);

/// sup-norm of D psi^{+1} (inverse = false) or D psi^{-1} (inverse = true),
/// from finite differences of the displacement.
double flow_derivative_sup(const FlowMap& flow, bool inverse);

/// f o psi^{+-1} by exact Fourier evaluation at the displaced points.
SpectralField compose(const SpectralField& f, const FlowMap& flow, bool inverse = false);

/// II'_j(f) = (L_eps Delta_j f) o psi  -  L_eps (Delta_j f o psi).
SpectralField capillary_commutator(const SpectralField& f, int j, const FlowMap& flow,
                                   double eps);

/// I_j = L_eps(g_j) with g_j = (grad Delta_j q) o psi - grad(Delta_j q o psi).
SpectralField capillary_remainder_I(const SpectralField& q, int j, const FlowMap& flow,
                                    double eps);

struct SystemRemainders {
    SpectralField transport; // R^1: Tr(D u~ (I - (D psi)^{-1}))
    SpectralField pressure;  // R^2: ((D psi)^{-T} - I) grad q~
    SpectralField viscous;   // R^3: (A u_j) o psi - A u~_j
};

SystemRemainders system_remainders(const SpectralField& u_j, const SpectralField& q_j,
                                   const FlowMap& flow, const PhysicalParams& P);

/// Normalized commutator ratios: for each t in t_values, flows of the
/// level-j mollifications of v, and
///   rho_j = ||II'_j|| / ((V + e^{2V} - 1) 2^{-j sigma} ||L_eps f||_{B^sigma_{2,1}}).
/// Rows: (t, V, fitted_C, smallness_ok, sum_rho, blocks).
Table verify_commutator_bound(const SpectralField& f, double sigma, double eps,
                              const SpectralField& v, std::span<const double> t_values,
                              int substeps = 32);

} // namespace nklab
