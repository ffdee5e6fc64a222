#include "nklab/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nklab/errors.hpp"

namespace nklab {

AdvectingVelocity AdvectingVelocity::constant(int dim, Vec2 a) {
    AdvectingVelocity v;
    v.dim_ = dim;
    v.periodic_ = true;
    v.grad_sup_ = 0.0;
    v.eval_ = [a](Vec2) { return a; };
    v.div_ = [](Vec2) { return 0.0; };
    return v;
}

AdvectingVelocity AdvectingVelocity::linear_1d(double rate) {
    AdvectingVelocity v;
    v.dim_ = 1;
    v.periodic_ = false;
    v.grad_sup_ = std::abs(rate);
    v.eval_ = [rate](Vec2 x) { return Vec2{rate * x[0], 0.0}; };
    v.div_ = [rate](Vec2) { return rate; };
    return v;
}

AdvectingVelocity AdvectingVelocity::rotation(double omega) {
    AdvectingVelocity v;
    v.dim_ = 2;
    v.periodic_ = false;
    v.grad_sup_ = std::abs(omega);
    v.eval_ = [omega](Vec2 x) { return Vec2{-omega * x[1], omega * x[0]}; };
    v.div_ = [](Vec2) { return 0.0; };
    return v;
}

AdvectingVelocity AdvectingVelocity::sinusoidal_shear(const PeriodicGrid& g, double amplitude) {
    AdvectingVelocity v;
    v.dim_ = g.dim;
    v.periodic_ = true;
    const double k0 = g.k0();
    v.grad_sup_ = std::abs(amplitude) * k0;
    if (g.dim == 1) {
        v.eval_ = [amplitude, k0](Vec2 x) { return Vec2{amplitude * std::sin(k0 * x[0]), 0.0}; };
        v.div_ = [amplitude, k0](Vec2 x) { return amplitude * k0 * std::cos(k0 * x[0]); };
    } else {
        v.eval_ = [amplitude, k0](Vec2 x) { return Vec2{amplitude * std::sin(k0 * x[1]), 0.0}; };
        v.div_ = [](Vec2) { return 0.0; };
    }
    return v;
}

AdvectingVelocity AdvectingVelocity::from_field(const SpectralField& field, int mollify_level) {
    if (field.components() != field.grid().dim)
        throw UsageError("AdvectingVelocity: vector field expected");
    AdvectingVelocity v;
    v.dim_ = field.grid().dim;
    v.periodic_ = true;
    const DyadicPartition part(field.grid());
    v.field_ = part.low_pass(field, mollify_level - 1); // S_{j-1} v
    v.div_field_ = divergence(*v.field_);
    // grid-sampled sup of |grad v|; adequate for band-limited fields
    double sup = 0.0;
    for (int a = 0; a < v.dim_; ++a) {
        double rowsq_max = 0.0;
        SpectralField comp(field.grid(), 1);
        for (std::size_t i = 0; i < field.grid().size(); ++i) comp.coef(0, i) = v.field_->coef(a, i);
        const auto grad = gradient_field(comp);
        const auto gs = grad.to_samples();
        const std::size_t N = field.grid().size();
        for (std::size_t i = 0; i < N; ++i) {
            double rowsq = 0.0;
            for (int bidx = 0; bidx < v.dim_; ++bidx) {
                const double gval = gs[std::size_t(bidx) * N + i];
                rowsq += gval * gval;
            }
            rowsq_max = std::max(rowsq_max, rowsq);
        }
        sup = std::max(sup, std::sqrt(rowsq_max));
    }
    v.grad_sup_ = sup;
    return v;
}

void AdvectingVelocity::eval_batch(std::span<const double> points, std::vector<double>& vel,
                                   std::vector<double>& div) const {
    const std::size_t npts = points.size() / std::size_t(dim_);
    vel.assign(npts * std::size_t(dim_), 0.0);
    div.assign(npts, 0.0);
    if (field_) {
        vel = evaluate_at_points(*field_, points);
        div = evaluate_at_points(*div_field_, points);
        return;
    }
    for (std::size_t i = 0; i < npts; ++i) {
        const Vec2 x{points[i * dim_], dim_ == 2 ? points[i * dim_ + 1] : 0.0};
        const Vec2 val = eval_(x);
        for (int c = 0; c < dim_; ++c) vel[std::size_t(c) * npts + i] = val[c];
        div[i] = div_(x);
    }
}

Vec2 FlowMap::point(std::size_t i) const {
    const double h = grid.length / grid.n;
    if (dim == 1) return {h * double(i), 0.0};
    return {h * double(i / std::size_t(grid.n)), h * double(i % std::size_t(grid.n))};
}

Vec2 FlowMap::forward(std::size_t i) const {
    const Vec2 x = point(i);
    const std::size_t N = grid.size();
    return {x[0] + disp_fwd[i], dim == 2 ? x[1] + disp_fwd[N + i] : 0.0};
}

Vec2 FlowMap::inverse(std::size_t i) const {
    const Vec2 x = point(i);
    const std::size_t N = grid.size();
    return {x[0] + disp_inv[i], dim == 2 ? x[1] + disp_inv[N + i] : 0.0};
}

namespace {

// positions: component-interleaved point list as used by evaluate_at_points
struct RkState {
    std::vector<double> pos;    // npts * dim, interleaved
    std::vector<double> divint; // npts
};

void rk4_advance(const AdvectingVelocity& v, RkState& st, double dt, int nsteps) {
    const int dim = v.dim();
    const std::size_t npts = st.divint.size();
    std::vector<double> k1v, k2v, k3v, k4v, k1d, k2d, k3d, k4d, stage(st.pos.size());
    auto eval = [&](const std::vector<double>& where, std::vector<double>& velout,
                    std::vector<double>& divout) { v.eval_batch(where, velout, divout); };
    for (int s = 0; s < nsteps; ++s) {
        eval(st.pos, k1v, k1d);
        for (std::size_t i = 0; i < npts; ++i)
            for (int c = 0; c < dim; ++c)
                stage[i * dim + c] = st.pos[i * dim + c] + 0.5 * dt * k1v[c * npts + i];
        eval(stage, k2v, k2d);
        for (std::size_t i = 0; i < npts; ++i)
            for (int c = 0; c < dim; ++c)
                stage[i * dim + c] = st.pos[i * dim + c] + 0.5 * dt * k2v[c * npts + i];
        eval(stage, k3v, k3d);
        for (std::size_t i = 0; i < npts; ++i)
            for (int c = 0; c < dim; ++c)
                stage[i * dim + c] = st.pos[i * dim + c] + dt * k3v[c * npts + i];
        eval(stage, k4v, k4d);
        for (std::size_t i = 0; i < npts; ++i) {
            for (int c = 0; c < dim; ++c)
                st.pos[i * dim + c] += dt / 6.0 *
                                       (k1v[c * npts + i] + 2.0 * k2v[c * npts + i] +
                                        2.0 * k3v[c * npts + i] + k4v[c * npts + i]);
            st.divint[i] += dt / 6.0 * (k1d[i] + 2.0 * k2d[i] + 2.0 * k3d[i] + k4d[i]);
        }
    }
}

} // namespace

FlowMap integrate_flow(const AdvectingVelocity& v, const PeriodicGrid& g, double t, int substeps) {
    if (substeps < 1) throw UsageError("integrate_flow: substeps must be >= 1");
    if (v.dim() != g.dim) throw UsageError("integrate_flow: dimension mismatch");
    FlowMap flow;
    flow.grid = g;
    flow.dim = g.dim;
    flow.t = t;
    flow.V = std::abs(t) * v.grad_sup();
    flow.periodic = v.periodic();
    flow.substeps = substeps;

    const std::size_t N = g.size();
    RkState st;
    st.pos.resize(N * std::size_t(g.dim));
    st.divint.assign(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 x = flow.point(i);
        for (int c = 0; c < g.dim; ++c) st.pos[i * g.dim + c] = x[c];
    }
    const RkState start = st;

    rk4_advance(v, st, t / substeps, substeps);
    flow.disp_fwd.resize(N * std::size_t(g.dim));
    flow.divint_fwd = st.divint;
    for (std::size_t i = 0; i < N; ++i)
        for (int c = 0; c < g.dim; ++c)
            flow.disp_fwd[std::size_t(c) * N + i] = st.pos[i * g.dim + c] - start.pos[i * g.dim + c];

    // inverse: integrate the characteristics backward from t to 0
    st = start;
    rk4_advance(v, st, -t / substeps, substeps);
    flow.disp_inv.resize(N * std::size_t(g.dim));
    flow.divint_inv = st.divint; // = -int_0^t div v along X(.,t,x)
    for (std::size_t i = 0; i < N; ++i)
        for (int c = 0; c < g.dim; ++c)
            flow.disp_inv[std::size_t(c) * N + i] = st.pos[i * g.dim + c] - start.pos[i * g.dim + c];
    return flow;
}

Vec2 apply_inverse(const FlowMap& flow, Vec2 x) {
    if (!flow.periodic) throw UsageError("apply_inverse: periodic flow required");
    SpectralField disp = SpectralField::from_samples(flow.grid, flow.disp_inv, flow.dim);
    std::vector<double> pt(flow.dim);
    for (int c = 0; c < flow.dim; ++c) pt[c] = x[c];
    const auto d = evaluate_at_points(disp, pt);
    return {x[0] + d[0], flow.dim == 2 ? x[1] + d[1] : 0.0};
}

namespace {

// 6th-order centered first-derivative weights (offsets -3..3)
constexpr double kFdW[7] = {-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0,
                            3.0 / 4.0,   -3.0 / 20.0, 1.0 / 60.0};

// d/dx_axis of a sampled component; NaN near the seam for non-periodic data
std::vector<double> fd_derivative(const PeriodicGrid& g, std::span<const double> samples, int axis,
                                  bool periodic) {
    const int n = g.n;
    const double h = g.length / n;
    const std::size_t N = g.size();
    std::vector<double> out(N, std::numeric_limits<double>::quiet_NaN());
    auto at = [&](int i0, int i1) -> double {
        if (g.dim == 1) return samples[std::size_t((i0 % n + n) % n)];
        return samples[std::size_t((i0 % n + n) % n) * n + std::size_t((i1 % n + n) % n)];
    };
    for (std::size_t i = 0; i < N; ++i) {
        const int i0 = g.dim == 1 ? int(i) : int(i / std::size_t(n));
        const int i1 = g.dim == 1 ? 0 : int(i % std::size_t(n));
        const int along = axis == 0 ? i0 : i1;
        if (!periodic && (along < 3 || along >= n - 3)) continue;
        double acc = 0.0;
        for (int o = -3; o <= 3; ++o)
            acc += kFdW[o + 3] * (axis == 0 ? at(i0 + o, i1) : at(i0, i1 + o));
        out[i] = acc / h;
    }
    return out;
}

// D psi entries (Jacobian of forward or inverse map) by finite differences
std::vector<std::vector<double>> fd_jacobian(const FlowMap& flow, const std::vector<double>& disp) {
    const std::size_t N = flow.grid.size();
    std::vector<std::vector<double>> J(flow.dim * flow.dim);
    for (int a = 0; a < flow.dim; ++a) {
        std::span<const double> comp(disp.data() + std::size_t(a) * N, N);
        for (int b = 0; b < flow.dim; ++b) {
            auto d = fd_derivative(flow.grid, comp, b, flow.periodic);
            if (a == b)
                for (auto& val : d) val += 1.0;
            J[a * flow.dim + b] = std::move(d);
        }
    }
    return J;
}

} // namespace

JacobianPair jacobian_det(const FlowMap& flow) {
    const std::size_t N = flow.grid.size();
    JacobianPair out;
    out.divergence_formula.resize(N);
    for (std::size_t i = 0; i < N; ++i) out.divergence_formula[i] = std::exp(flow.divint_fwd[i]);
    const auto J = fd_jacobian(flow, flow.disp_fwd);
    out.finite_difference.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        if (flow.dim == 1) {
            out.finite_difference[i] = J[0][i];
        } else {
            out.finite_difference[i] = J[0][i] * J[3][i] - J[1][i] * J[2][i];
        }
    }
    return out;
}

double flow_derivative_sup(const FlowMap& flow, bool inverse) {
    const auto J = fd_jacobian(flow, inverse ? flow.disp_inv : flow.disp_fwd);
    const std::size_t N = flow.grid.size();
    double sup = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        if (std::isnan(J[0][i])) continue;
        if (flow.dim == 1) {
            sup = std::max(sup, std::abs(J[0][i]));
        } else {
            // exact 2x2 operator norm: largest singular value
            const double a = J[0][i], b = J[1][i], c = J[2][i], d = J[3][i];
            const double trace = a * a + b * b + c * c + d * d;
            const double det = a * d - b * c;
            const double disc = std::sqrt(std::max(0.0, trace * trace - 4.0 * det * det));
            sup = std::max(sup, std::sqrt(0.5 * (trace + disc)));
        }
    }
    return sup;
}

SpectralField compose(const SpectralField& f, const FlowMap& flow, bool inverse) {
    if (!(f.grid() == flow.grid)) throw UsageError("compose: grid mismatch");
    if (!flow.periodic) throw UsageError("compose: periodic flow required");
    const std::size_t N = flow.grid.size();
    std::vector<double> pts(N * std::size_t(flow.dim));
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 y = inverse ? flow.inverse(i) : flow.forward(i);
        for (int c = 0; c < flow.dim; ++c) pts[i * flow.dim + c] = y[c];
    }
    const auto samples = evaluate_at_points(f, pts);
    return SpectralField::from_samples(flow.grid, samples, f.components());
}

SpectralField capillary_commutator(const SpectralField& f, int j, const FlowMap& flow,
                                   double eps) {
    const DyadicPartition part(f.grid());
    const auto fj = part.block(f, j);
    const auto term1 = compose(capillary_op(fj, eps), flow);
    const auto term2 = capillary_op(compose(fj, flow), eps);
    return term1 - term2;
}

SpectralField capillary_remainder_I(const SpectralField& q, int j, const FlowMap& flow,
                                    double eps) {
    const DyadicPartition part(q.grid());
    const auto qj = part.block(q, j);
    const auto grad_then_compose = compose(gradient_field(qj), flow);
    const auto compose_then_grad = gradient_field(compose(qj, flow));
    return capillary_op(grad_then_compose - compose_then_grad, eps);
}

SystemRemainders system_remainders(const SpectralField& u_j, const SpectralField& q_j,
                                   const FlowMap& flow, const PhysicalParams& P) {
    const auto& g = u_j.grid();
    if (u_j.components() != g.dim) throw UsageError("system_remainders: u_j must be a vector field");
    const std::size_t N = g.size();

    const auto u_tilde = compose(u_j, flow);
    const auto q_tilde = compose(q_j, flow);

    // D psi from the (periodic, smooth) displacement, spectrally
    const auto disp = SpectralField::from_samples(g, flow.disp_fwd, g.dim);
    std::vector<std::vector<double>> Dpsi(g.dim * g.dim);
    for (int a = 0; a < g.dim; ++a) {
        SpectralField comp(g, 1);
        for (std::size_t i = 0; i < N; ++i) comp.coef(0, i) = disp.coef(a, i);
        for (int b = 0; b < g.dim; ++b) {
            Dpsi[a * g.dim + b] = derivative(comp, b).to_samples();
            if (a == b)
                for (auto& v : Dpsi[a * g.dim + b]) v += 1.0;
        }
    }
    // (D psi)^{-1} pointwise = (D psi^{-1}) o psi by the inverse function rule
    std::vector<std::vector<double>> inv(g.dim * g.dim, std::vector<double>(N));
    for (std::size_t i = 0; i < N; ++i) {
        if (g.dim == 1) {
            inv[0][i] = 1.0 / Dpsi[0][i];
        } else {
            const double det = Dpsi[0][i] * Dpsi[3][i] - Dpsi[1][i] * Dpsi[2][i];
            inv[0][i] = Dpsi[3][i] / det;
            inv[1][i] = -Dpsi[1][i] / det;
            inv[2][i] = -Dpsi[2][i] / det;
            inv[3][i] = Dpsi[0][i] / det;
        }
    }

    // D u~ spectrally from the composed samples
    std::vector<std::vector<double>> Dut(g.dim * g.dim);
    for (int a = 0; a < g.dim; ++a) {
        SpectralField comp(g, 1);
        for (std::size_t i = 0; i < N; ++i) comp.coef(0, i) = u_tilde.coef(a, i);
        for (int b = 0; b < g.dim; ++b) Dut[a * g.dim + b] = derivative(comp, b).to_samples();
    }

    // R^1 = Tr(D u~ (I - (D psi)^{-1}))
    std::vector<double> r1(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
        for (int a = 0; a < g.dim; ++a)
            for (int b = 0; b < g.dim; ++b) {
                const double eye = a == b ? 1.0 : 0.0;
                r1[i] += Dut[a * g.dim + b][i] * (eye - inv[b * g.dim + a][i]);
            }

    // R^2 = ((D psi)^{-T} - I) grad q~
    const auto grad_qt = gradient_field(q_tilde).to_samples();
    std::vector<double> r2(N * std::size_t(g.dim), 0.0);
    for (std::size_t i = 0; i < N; ++i)
        for (int a = 0; a < g.dim; ++a) {
            double acc = 0.0;
            for (int b = 0; b < g.dim; ++b) {
                const double eye = a == b ? 1.0 : 0.0;
                acc += (inv[b * g.dim + a][i] - eye) * grad_qt[std::size_t(b) * N + i];
            }
            r2[std::size_t(a) * N + i] = acc;
        }

    // R^3 = (A u_j) o psi - A u~_j, with A u = mu Lap u + (lambda+mu) grad div u
    auto apply_A = [&](const SpectralField& u) {
        SpectralField out(g, g.dim);
        for (std::size_t i = 0; i < N; ++i) {
            const auto xi = g.wavevector(i);
            const double xi2 = xi[0] * xi[0] + xi[1] * xi[1];
            Complex du = 0.0;
            for (int c = 0; c < g.dim; ++c) du += Complex(0.0, xi[c]) * u.coef(c, i);
            for (int c = 0; c < g.dim; ++c)
                out.coef(c, i) =
                    -P.mu * xi2 * u.coef(c, i) + (P.lambda + P.mu) * Complex(0.0, xi[c]) * du;
        }
        return out;
    };
    const auto r3 = compose(apply_A(u_j), flow) - apply_A(u_tilde);

    return SystemRemainders{SpectralField::from_samples(g, r1, 1),
                            SpectralField::from_samples(g, r2, g.dim), r3};
}

Table verify_commutator_bound(const SpectralField& f, double sigma, double eps,
                              const SpectralField& v, std::span<const double> t_values,
                              int substeps) {
    const auto& g = f.grid();
    const DyadicPartition part(g);
    const double cap_norm = besov_norm(capillary_op(f, eps), sigma, 2.0, 1.0);
    Table table({"t", "V", "fitted_C", "smallness_ok", "sum_rho", "blocks"});
    for (double t : t_values) {
        double sum_rho = 0.0;
        long long blocks = 0;
        double fitted_C = 0.0;
        double V_used = 0.0;
        for (int j = part.j_min; j <= part.j_max; ++j) {
            if (part.block_l2(f, j) < 1e-13 * f.l2()) continue;
            const auto vel = AdvectingVelocity::from_field(v, j);
            const auto flow = integrate_flow(vel, g, t, substeps);
            if (flow.V <= 0.0) continue; // mollification removed the velocity
            V_used = std::max(V_used, flow.V);
            const double dsup = std::max(flow_derivative_sup(flow, false),
                                         flow_derivative_sup(flow, true));
            fitted_C = std::max(fitted_C, std::log(std::max(dsup, 1.0 + 1e-14)) / flow.V);
            const double denom =
                (flow.V + std::expm1(2.0 * flow.V)) * std::exp2(-double(j) * sigma) * cap_norm;
            sum_rho += capillary_commutator(f, j, flow, eps).l2() / denom;
            ++blocks;
        }
        const bool small_ok = std::expm1(2.0 * fitted_C * V_used) <= 0.5;
        table.add_row({t, V_used, fitted_C, std::string(small_ok ? "yes" : "no"), sum_rho, blocks});
    }
    return table;
}

} // namespace nklab
