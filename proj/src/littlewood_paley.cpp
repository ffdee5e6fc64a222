#include "nklab/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nklab/errors.hpp"

namespace nklab {

namespace {

double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// smooth transition, 0 at t<=0, 1 at t>=1, strictly monotone in between
double transition(double t) {
    const double a = bump(t);
    const double b = bump(1.0 - t);
    return a / (a + b);
}

// Gauss-Legendre on [-1,1]; nodes by Newton iteration on P_n.
void gauss_legendre(int npts, std::vector<double>& x, std::vector<double>& w) {
    x.assign(npts, 0.0);
    w.assign(npts, 0.0);
    const int m = (npts + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (npts + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < npts; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = npts * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[npts - 1 - i] = z;
        w[i] = w[npts - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    return s;
}

} // namespace

double DyadicPartition::chi(double r) {
    r = std::abs(r);
    if (r <= 0.75) return 1.0;
    if (r >= 4.0 / 3.0) return 0.0;
    return transition((4.0 / 3.0 - r) / (4.0 / 3.0 - 0.75));
}

DyadicPartition::DyadicPartition(const PeriodicGrid& g) : grid(g) {
    const double xi_min = g.k0();
    const double xi_max = g.k0() * (g.n / 2.0) * std::sqrt(double(g.dim));
    j_min = int(std::floor(std::log2(xi_min))) - 2;
    j_max = int(std::ceil(std::log2(xi_max))) + 1;
}

SpectralField DyadicPartition::block(const SpectralField& f, int j) const {
    const double scale = std::ldexp(1.0, -j);
    SpectralField out = f;
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double m = phi(scale * std::sqrt(g.xi_norm2(i)));
        for (int c = 0; c < f.components(); ++c) out.coef(c, i) *= m;
    }
    return out;
}

SpectralField DyadicPartition::low_pass(const SpectralField& f, int j) const {
    const double scale = std::ldexp(1.0, -j);
    SpectralField out = f;
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double m = chi(scale * std::sqrt(g.xi_norm2(i)));
        for (int c = 0; c < f.components(); ++c) out.coef(c, i) *= m;
    }
    return out;
}

double DyadicPartition::block_l2(const SpectralField& f, int j) const {
    const double scale = std::ldexp(1.0, -j);
    const auto& g = f.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double m = phi(scale * std::sqrt(g.xi_norm2(i)));
        if (m == 0.0) continue;
        double e = 0.0;
        for (int c = 0; c < f.components(); ++c) e += std::norm(f.coef(c, i));
        s += m * m * e;
    }
    const double vol = g.dim == 1 ? g.length : g.length * g.length;
    return std::sqrt(vol * s);
}

double besov_norm(const SpectralField& f, double s, double p_idx, double r) {
    if (p_idx != 2.0 && !std::isinf(p_idx)) throw UsageError("besov_norm: p must be 2 or inf");
    if (r != 1.0 && r != 2.0 && !std::isinf(r)) throw UsageError("besov_norm: r must be 1, 2 or inf");
    const DyadicPartition part(f.grid());
    double acc = 0.0, sup = 0.0;
    for (int j = part.j_min; j <= part.j_max; ++j) {
        const double bn = p_idx == 2.0 ? part.block_l2(f, j) : part.block(f, j).linf();
        if (bn == 0.0) continue;
        const double term = std::exp2(double(j) * s) * bn;
        if (std::isinf(r))
            sup = std::max(sup, term);
        else if (r == 1.0)
            acc += term;
        else
            acc += term * term;
    }
    if (std::isinf(r)) return sup;
    return r == 1.0 ? acc : std::sqrt(acc);
}

int HybridSpec::l_eps() const {
    if (!(eps > 0.0) || !(gamma > 0.0)) throw UsageError("hybrid spec: eps, gamma must be > 0");
    return int(std::floor(0.5 * std::log2(gamma / (DyadicPartition::C0 * eps * eps)) - 1.0));
}

double HybridSpec::weight(int j) const {
    if (j <= l_eps()) return std::exp2(double(j) * s_low);
    return std::exp2(double(j) * s_high) / (eps * eps);
}

double hybrid_index_norm(const SpectralField& f, const HybridSpec& spec) {
    const DyadicPartition part(f.grid());
    double acc = 0.0;
    for (int j = part.j_min; j <= part.j_max; ++j) acc += spec.weight(j) * part.block_l2(f, j);
    return acc;
}

namespace {

double fd_form_norm(const SpectralField& f, double s, double eps) {
    const int dim = f.grid().dim;
    const int npts = dim == 1 ? 64 : 32;
    const double radius = 12.0;
    std::vector<double> x, w;
    gauss_legendre(npts, x, w);
    for (auto& v : x) v *= radius;
    for (auto& v : w) v *= radius;

    const DyadicPartition part(f.grid());
    const auto& g = f.grid();
    const double vol = dim == 1 ? g.length : g.length * g.length;
    const int nblocks = part.j_max - part.j_min + 1;

    // flatten to live modes with their per-block phi^2 energy weights
    struct LiveMode {
        double xi0, xi1;
        int block_lo;
        double wblk[3]; // phi^2 * energy for up to 3 overlapping blocks
    };
    std::vector<LiveMode> live;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double energy = 0.0;
        for (int c = 0; c < f.components(); ++c) energy += std::norm(f.coef(c, i));
        if (energy == 0.0) continue;
        const auto xi = g.wavevector(i);
        const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
        if (r == 0.0) continue;
        LiveMode m{xi[0], xi[1], 0, {0.0, 0.0, 0.0}};
        // phi(2^{-j} r) is nonzero for at most three consecutive j
        const int j_center = int(std::floor(std::log2(r)));
        m.block_lo = std::max(part.j_min, j_center - 1);
        for (int o = 0; o < 3; ++o) {
            const int j = m.block_lo + o;
            if (j > part.j_max) break;
            const double p = DyadicPartition::phi(std::ldexp(1.0, -j) * r);
            m.wblk[o] = p * p * energy;
        }
        live.push_back(m);
    }

    std::vector<double> block_acc(nblocks);
    double integral = 0.0;
    auto contribution = [&](std::array<double, 2> y, double weight) {
        std::fill(block_acc.begin(), block_acc.end(), 0.0);
        for (const auto& m : live) {
            const double sym = 2.0 * (std::cos(eps * (m.xi0 * y[0] + m.xi1 * y[1])) - 1.0);
            const double s2 = sym * sym;
            for (int o = 0; o < 3; ++o)
                if (m.wblk[o] != 0.0) block_acc[m.block_lo - part.j_min + o] += s2 * m.wblk[o];
        }
        double bsum = 0.0;
        for (int j = part.j_min; j <= part.j_max; ++j)
            bsum += std::exp2(double(j) * s) * std::sqrt(vol * block_acc[j - part.j_min]);
        integral += weight * std::exp(-(y[0] * y[0] + y[1] * y[1]) / 16.0) * bsum;
    };
    if (dim == 1) {
        for (int i = 0; i < npts; ++i) contribution({x[i], 0.0}, w[i]);
    } else {
        for (int i = 0; i < npts; ++i)
            for (int k = 0; k < npts; ++k) contribution({x[i], x[k]}, w[i] * w[k]);
    }
    return integral / (eps * eps);
}

} // namespace

double hybrid_norm(const SpectralField& f, double s, double eps, HybridForm form, double gamma) {
    if (!(eps > 0.0)) throw UsageError("hybrid_norm: eps must be > 0");
    switch (form) {
        case HybridForm::index:
            return hybrid_index_norm(f, HybridSpec{s + 2.0, s, eps, gamma});
        case HybridForm::multiplier:
            return besov_norm(capillary_op(f, eps), s, 2.0, 1.0);
        case HybridForm::minform: {
            const DyadicPartition part(f.grid());
            double acc = 0.0;
            for (int j = part.j_min; j <= part.j_max; ++j) {
                const double wj = std::min(1.0 / (eps * eps), std::exp2(2.0 * j));
                acc += wj * std::exp2(double(j) * s) * part.block_l2(f, j);
            }
            return acc;
        }
        case HybridForm::fdform:
            return fd_form_norm(f, s, eps);
    }
    throw UsageError("hybrid_norm: unknown form");
}

double tilde_norm(const SpectralField& f, double alpha, double s, double r) {
    if (!(alpha > 0.0)) throw UsageError("tilde_norm: alpha must be > 0");
    if (r == 0.0) throw UsageError("tilde_norm: r must be nonzero");
    const double expo = std::isinf(r) ? 1.0 : 1.0 - 2.0 / r;
    const DyadicPartition part(f.grid());
    double acc = 0.0;
    for (int j = part.j_min; j <= part.j_max; ++j) {
        const double wj = std::pow(std::max(alpha, std::exp2(double(-j))), expo);
        acc += std::exp2(double(j) * s) * wj * part.block_l2(f, j);
    }
    return acc;
}

void TimeSeriesField::validate() const {
    if (times.size() != fields.size() || times.empty())
        throw UsageError("time series: times and fields must align and be nonempty");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw UsageError("time series: times must increase");
    for (const auto& f : fields)
        if (!(f.grid() == fields[0].grid())) throw UsageError("time series: grids must match");
}

namespace {

template <class PerBlock>
double sum_blocks_over_time(const TimeSeriesField& traj, double rho, PerBlock&& weight_of) {
    traj.validate();
    const DyadicPartition part(traj.fields[0].grid());
    std::vector<double> vals(traj.times.size());
    double acc = 0.0;
    for (int j = part.j_min; j <= part.j_max; ++j) {
        for (std::size_t i = 0; i < traj.fields.size(); ++i)
            vals[i] = part.block_l2(traj.fields[i], j);
        const double tnorm = std::isinf(rho) ? *std::max_element(vals.begin(), vals.end())
                                             : trapezoid(traj.times, vals);
        acc += weight_of(j) * tnorm;
    }
    return acc;
}

} // namespace

double chemin_lerner(const TimeSeriesField& traj, double rho, double s) {
    if (rho != 1.0 && !std::isinf(rho)) throw UsageError("chemin_lerner: rho must be 1 or inf");
    return sum_blocks_over_time(traj, rho, [s](int j) { return std::exp2(double(j) * s); });
}

double chemin_lerner_hybrid(const TimeSeriesField& traj, const HybridSpec& spec) {
    return sum_blocks_over_time(traj, 1.0, [&spec](int j) { return spec.weight(j); });
}

double energy_norm(const TimeSeriesField& q_traj, const TimeSeriesField& u_traj, double s,
                   double eps, double gamma) {
    const double inf = std::numeric_limits<double>::infinity();
    return chemin_lerner(u_traj, inf, s - 1.0) + chemin_lerner(q_traj, inf, s - 1.0) +
           chemin_lerner(q_traj, inf, s) + chemin_lerner(u_traj, 1.0, s + 1.0) +
           chemin_lerner_hybrid(q_traj, HybridSpec{s + 1.0, s, eps, gamma}) +
           chemin_lerner_hybrid(q_traj, HybridSpec{s + 2.0, s, eps, gamma});
}

BonyParts bony_decompose(const SpectralField& u, const SpectralField& v) {
    assert_band_limited(u, u.grid().band_limit());
    assert_band_limited(v, v.grid().band_limit());
    const DyadicPartition part(u.grid());
    BonyParts out{SpectralField(u.grid(), 1), SpectralField(u.grid(), 1),
                  SpectralField(u.grid(), 1)};
    std::vector<SpectralField> bu, bv;
    for (int j = part.j_min; j <= part.j_max; ++j) {
        bu.push_back(part.block(u, j));
        bv.push_back(part.block(v, j));
    }
    const int nb = int(bu.size());
    for (int j = 0; j < nb; ++j) {
        const int level = part.j_min + j;
        // S_{l-1} = chi(2^{-(l-1)} xi) collects the blocks k <= l-2
        out.para_uv += pointwise_product(part.low_pass(u, level - 1), bv[j]);
        out.para_vu += pointwise_product(part.low_pass(v, level - 1), bu[j]);
        for (int k = std::max(0, j - 1); k <= std::min(nb - 1, j + 1); ++k)
            out.remainder += pointwise_product(bu[j], bv[k]);
    }
    return out;
}

SpectralField transport_commutator(const SpectralField& v, const SpectralField& h, int j) {
    if (h.components() != 1) throw UsageError("transport_commutator: h must be scalar");
    if (v.components() != v.grid().dim)
        throw UsageError("transport_commutator: v must be a vector field");
    assert_band_limited(v, v.grid().band_limit());
    assert_band_limited(h, h.grid().band_limit());
    const DyadicPartition part(h.grid());
    const auto sv = part.low_pass(v, j - 1); // S_{j-1} = chi(2^{-(j-1)} xi)
    const auto term1 = pointwise_product(sv, gradient_field(part.block(h, j)));
    const auto term2 = part.block(pointwise_product(v, gradient_field(h)), j);
    return term1 - term2;
}

Table norm_report(const SpectralField& f, double s, double eps, double gamma) {
    Table t({"norm_name", "s", "eps", "form", "value"});
    t.add_row({std::string("besov"), s, eps, std::string("-"), besov_norm(f, s, 2.0, 1.0)});
    const std::pair<const char*, HybridForm> forms[4] = {{"index", HybridForm::index},
                                                         {"multiplier", HybridForm::multiplier},
                                                         {"minform", HybridForm::minform},
                                                         {"fdform", HybridForm::fdform}};
    for (const auto& [name, form] : forms)
        t.add_row({std::string("hybrid"), s, eps, std::string(name),
                   hybrid_norm(f, s, eps, form, gamma)});
    return t;
}

} // namespace nklab
