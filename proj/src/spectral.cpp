#include "nklab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "nklab/errors.hpp"

namespace nklab {

namespace {

struct PlanKey {
    int dim, n, sign;
    bool operator<(const PlanKey& o) const {
        return std::tie(dim, n, sign) < std::tie(o.dim, o.n, o.sign);
    }
};

struct PlanCache {
    std::mutex mtx;
    std::map<PlanKey, fftw_plan> plans;
    ~PlanCache() {
        for (auto& [key, plan] : plans) {
            (void)key;
            fftw_destroy_plan(plan);
        }
    }
};

// Plans are reused across arrays (FFTW_UNALIGNED); planning is serialized,
// execution via fftw_execute_dft is thread-safe. The cache lives until
// process exit and destroys its plans then.
fftw_plan plan_for(int dim, int n, int sign) {
    static PlanCache cache;
    std::lock_guard<std::mutex> lock(cache.mtx);
    auto it = cache.plans.find({dim, n, sign});
    if (it != cache.plans.end()) return it->second;
    std::vector<fftw_complex> scratch(dim == 1 ? std::size_t(n) : std::size_t(n) * n);
    fftw_plan p = dim == 1 ? fftw_plan_dft_1d(n, scratch.data(), scratch.data(), sign,
                                              FFTW_ESTIMATE | FFTW_UNALIGNED)
                           : fftw_plan_dft_2d(n, n, scratch.data(), scratch.data(), sign,
                                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.plans.emplace(PlanKey{dim, n, sign}, p);
    return p;
}

void fft_inplace(const PeriodicGrid& g, Complex* data, int sign) {
    fftw_plan p = plan_for(g.dim, g.n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data));
}

} // namespace

std::array<double, 2> PeriodicGrid::wavevector(std::size_t flat) const {
    const double f = k0();
    if (dim == 1) return {f * mode_of(int(flat)), 0.0};
    return {f * mode_of(int(flat / std::size_t(n))), f * mode_of(int(flat % std::size_t(n)))};
}

std::array<int, 2> PeriodicGrid::modes(std::size_t flat) const {
    if (dim == 1) return {mode_of(int(flat)), 0};
    return {mode_of(int(flat / std::size_t(n))), mode_of(int(flat % std::size_t(n)))};
}

double PeriodicGrid::xi_norm2(std::size_t flat) const {
    auto xi = wavevector(flat);
    return xi[0] * xi[0] + xi[1] * xi[1];
}

void PeriodicGrid::validate() const {
    if (dim != 1 && dim != 2) throw UsageError("grid.dim must be 1 or 2");
    if (n < 8 || (n & (n - 1)) != 0) throw UsageError("grid.n must be a power of two >= 8");
    if (!(length > 0.0)) throw UsageError("grid.length must be > 0");
}

SpectralField::SpectralField(const PeriodicGrid& g, int components)
    : grid_(g), components_(components), coef_(g.size() * std::size_t(components)) {
    if (components < 1 || components > 2) throw UsageError("field components must be 1 or 2");
}

SpectralField SpectralField::from_samples(const PeriodicGrid& g, std::span<const double> samples,
                                          int components) {
    if (samples.size() != g.size() * std::size_t(components))
        throw UsageError("from_samples: sample count does not match grid");
    SpectralField f(g, components);
    const double inv_n = 1.0 / double(g.size());
    for (int c = 0; c < components; ++c) {
        auto block = f.coefs(c);
        const double* src = samples.data() + std::size_t(c) * g.size();
        for (std::size_t i = 0; i < g.size(); ++i) block[i] = src[i];
        fft_inplace(g, block.data(), FFTW_FORWARD);
        for (auto& z : block) z *= inv_n;
    }
    return f;
}

std::vector<double> SpectralField::to_samples() const {
    std::vector<double> out(coef_.size());
    std::vector<Complex> tmp(grid_.size());
    for (int c = 0; c < components_; ++c) {
        auto block = coefs(c);
        std::copy(block.begin(), block.end(), tmp.begin());
        fft_inplace(grid_, tmp.data(), FFTW_BACKWARD);
        double* dst = out.data() + std::size_t(c) * grid_.size();
        for (std::size_t i = 0; i < grid_.size(); ++i) dst[i] = tmp[i].real();
    }
    return out;
}

void SpectralField::set_mode(int c, std::array<int, 2> k, Complex v, bool conj_pair) {
    auto idx_of = [&](int k0arg, int k1arg) -> std::size_t {
        if (grid_.dim == 1) return std::size_t(grid_.slot_of(k0arg));
        return std::size_t(grid_.slot_of(k0arg)) * grid_.n + grid_.slot_of(k1arg);
    };
    coef(c, idx_of(k[0], k[1])) = v;
    if (conj_pair && !(k[0] == 0 && k[1] == 0)) coef(c, idx_of(-k[0], -k[1])) = std::conj(v);
}

Complex SpectralField::mode(int c, std::array<int, 2> k) const {
    if (grid_.dim == 1) return coef(c, std::size_t(grid_.slot_of(k[0])));
    return coef(c, std::size_t(grid_.slot_of(k[0])) * grid_.n + grid_.slot_of(k[1]));
}

void SpectralField::zero_mean() {
    for (int c = 0; c < components_; ++c) coef(c, 0) = 0.0;
}

double SpectralField::l2() const {
    double s = 0.0;
    for (const auto& z : coef_) s += std::norm(z);
    const double vol = grid_.dim == 1 ? grid_.length : grid_.length * grid_.length;
    return std::sqrt(vol * s);
}

double SpectralField::linf() const {
    double m = 0.0;
    std::vector<Complex> tmp(grid_.size());
    for (int c = 0; c < components_; ++c) {
        auto block = coefs(c);
        std::copy(block.begin(), block.end(), tmp.begin());
        fft_inplace(grid_, tmp.data(), FFTW_BACKWARD);
        for (const auto& z : tmp) m = std::max(m, std::abs(z));
    }
    return m;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    if (!(grid_ == o.grid_) || components_ != o.components_) throw UsageError("field shape mismatch");
    for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += o.coef_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    if (!(grid_ == o.grid_) || components_ != o.components_) throw UsageError("field shape mismatch");
    for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] -= o.coef_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& z : coef_) z *= s;
    return *this;
}

SpectralField apply_multiplier(const SpectralField& f,
                               const std::function<Complex(std::array<double, 2>)>& m) {
    SpectralField out = f;
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Complex mv = m(g.wavevector(i));
        if (!std::isfinite(mv.real()) || !std::isfinite(mv.imag()))
            throw NumericalError("apply_multiplier: non-finite symbol value");
        for (int c = 0; c < f.components(); ++c) out.coef(c, i) *= mv;
    }
    return out;
}

SpectralField derivative(const SpectralField& f, int axis) {
    SpectralField out = f;
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Complex d(0.0, g.wavevector(i)[axis]);
        for (int c = 0; c < f.components(); ++c) out.coef(c, i) *= d;
    }
    return out;
}

SpectralField gradient_field(const SpectralField& scalar) {
    if (scalar.components() != 1) throw UsageError("gradient_field: scalar input expected");
    const auto& g = scalar.grid();
    SpectralField out(g, g.dim);
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto xi = g.wavevector(i);
        for (int a = 0; a < g.dim; ++a) out.coef(a, i) = Complex(0.0, xi[a]) * scalar.coef(0, i);
    }
    return out;
}

SpectralField divergence(const SpectralField& u) {
    const auto& g = u.grid();
    if (u.components() != g.dim) throw UsageError("divergence: vector input expected");
    SpectralField out(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto xi = g.wavevector(i);
        Complex s = 0.0;
        for (int a = 0; a < g.dim; ++a) s += Complex(0.0, xi[a]) * u.coef(a, i);
        out.coef(0, i) = s;
    }
    return out;
}

HelmholtzParts helmholtz_split(const SpectralField& u) {
    const auto& g = u.grid();
    if (u.components() != g.dim) throw UsageError("helmholtz_split: vector input expected");
    for (int c = 0; c < u.components(); ++c)
        if (std::abs(u.mean(c)) > 1e-13 * (1.0 + u.l2()))
            throw UsageError("helmholtz_split: input must be zero-mean");
    HelmholtzParts parts{SpectralField(g, 1), SpectralField(g, 1)};
    for (std::size_t i = 1; i < g.size(); ++i) {
        auto xi = g.wavevector(i);
        const double norm = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
        if (norm == 0.0) continue; // only the flat==0 slot has |xi| = 0
        if (g.dim == 1) {
            parts.v.coef(0, i) = Complex(0.0, xi[0] / norm) * u.coef(0, i);
        } else {
            parts.v.coef(0, i) =
                Complex(0.0, 1.0 / norm) * (xi[0] * u.coef(0, i) + xi[1] * u.coef(1, i));
            parts.w.coef(0, i) =
                Complex(0.0, 1.0 / norm) * (xi[0] * u.coef(1, i) - xi[1] * u.coef(0, i));
        }
    }
    return parts;
}

SpectralField helmholtz_recompose(const SpectralField& v, const SpectralField& w, int dim) {
    const auto& g = v.grid();
    SpectralField u(g, dim);
    for (std::size_t i = 1; i < g.size(); ++i) {
        auto xi = g.wavevector(i);
        const double norm = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
        if (norm == 0.0) continue;
        if (dim == 1) {
            u.coef(0, i) = Complex(0.0, -xi[0] / norm) * v.coef(0, i);
        } else {
            u.coef(0, i) = Complex(0.0, -xi[0] / norm) * v.coef(0, i) +
                           Complex(0.0, xi[1] / norm) * w.coef(0, i);
            u.coef(1, i) = Complex(0.0, -xi[1] / norm) * v.coef(0, i) +
                           Complex(0.0, -xi[0] / norm) * w.coef(0, i);
        }
    }
    return u;
}

double capillary_symbol(double xi2, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("capillary_symbol: eps must be > 0");
    return std::expm1(-eps * eps * xi2) / (eps * eps);
}

SpectralField capillary_op(const SpectralField& f, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("capillary_op: eps must be > 0");
    SpectralField out = f;
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double mv = capillary_symbol(g.xi_norm2(i), eps);
        for (int c = 0; c < f.components(); ++c) out.coef(c, i) *= mv;
    }
    return out;
}

SpectralField symmetric_difference(const SpectralField& f, std::array<double, 2> y, double eps) {
    SpectralField out = f;
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto xi = g.wavevector(i);
        const double phase = eps * (xi[0] * y[0] + xi[1] * y[1]);
        const double mv = 2.0 * (std::cos(phase) - 1.0);
        for (int c = 0; c < f.components(); ++c) out.coef(c, i) *= mv;
    }
    return out;
}

SpectralField random_band_limited(const PeriodicGrid& g, int components, int kmax,
                                  std::uint64_t seed, double amplitude) {
    if (kmax > g.band_limit()) throw UsageError("random_band_limited: kmax beyond alias guard");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralField f(g, components);
    // draw positive half-space modes, mirror conjugates
    for (int c = 0; c < components; ++c) {
        if (g.dim == 1) {
            for (int k = 1; k <= kmax; ++k)
                f.set_mode(c, {k, 0}, Complex(gauss(rng), gauss(rng)));
        } else {
            for (int k0v = -kmax; k0v <= kmax; ++k0v)
                for (int k1v = 1; k1v <= kmax; ++k1v)
                    f.set_mode(c, {k0v, k1v}, Complex(gauss(rng), gauss(rng)));
            for (int k0v = 1; k0v <= kmax; ++k0v)
                f.set_mode(c, {k0v, 0}, Complex(gauss(rng), gauss(rng)));
        }
    }
    const double norm = f.l2();
    if (norm > 0.0) f *= amplitude / norm;
    return f;
}

void assert_band_limited(const SpectralField& f, int kmax, double rel_tol) {
    const auto& g = f.grid();
    double inside = 0.0, outside = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto k = g.modes(i);
        const bool in = std::abs(k[0]) <= kmax && std::abs(k[1]) <= kmax;
        for (int c = 0; c < f.components(); ++c) (in ? inside : outside) += std::norm(f.coef(c, i));
    }
    if (outside > rel_tol * rel_tol * (inside + outside) && outside > 0.0)
        throw NumericalError("aliasing guard: spectral energy beyond |k| <= " + std::to_string(kmax));
}

SpectralField pointwise_product(const SpectralField& a, const SpectralField& b) {
    if (!(a.grid() == b.grid())) throw UsageError("pointwise_product: grid mismatch");
    const auto& g = a.grid();
    const auto sa = a.to_samples();
    const auto sb = b.to_samples();
    const std::size_t N = g.size();
    if (a.components() == b.components() && a.components() > 1) {
        std::vector<double> dot(N, 0.0);
        for (int c = 0; c < a.components(); ++c)
            for (std::size_t i = 0; i < N; ++i) dot[i] += sa[c * N + i] * sb[c * N + i];
        return SpectralField::from_samples(g, dot, 1);
    }
    const auto& scal = a.components() == 1 ? sa : sb;
    const auto& vec = a.components() == 1 ? sb : sa;
    const int comps = a.components() == 1 ? b.components() : a.components();
    std::vector<double> prod(std::size_t(comps) * N);
    for (int c = 0; c < comps; ++c)
        for (std::size_t i = 0; i < N; ++i) prod[c * N + i] = scal[i] * vec[c * N + i];
    return SpectralField::from_samples(g, prod, comps);
}

std::vector<double> evaluate_at_points(const SpectralField& f, std::span<const double> points) {
    const auto& g = f.grid();
    const std::size_t npts = points.size() / std::size_t(g.dim);
    std::vector<double> out(npts * std::size_t(f.components()));
    if (g.dim == 1) {
        // gather live modes once; mollified fields are mostly zeros
        std::vector<std::pair<double, Complex>> live;
        std::vector<std::size_t> live_comp_start(f.components() + 1, 0);
        for (int c = 0; c < f.components(); ++c) {
            for (std::size_t i = 0; i < g.size(); ++i)
                if (f.coef(c, i) != 0.0)
                    live.emplace_back(g.k0() * g.mode_of(int(i)), f.coef(c, i));
            live_comp_start[c + 1] = live.size();
        }
        for (std::size_t pi = 0; pi < npts; ++pi) {
            const double x = points[pi];
            for (int c = 0; c < f.components(); ++c) {
                Complex acc = 0.0;
                for (std::size_t k = live_comp_start[c]; k < live_comp_start[c + 1]; ++k)
                    acc += live[k].second * std::polar(1.0, live[k].first * x);
                out[c * npts + pi] = acc.real();
            }
        }
        return out;
    }
    const int n = g.n;
    struct Mode {
        int i0, i1;
        Complex coef;
    };
    std::vector<Mode> live;
    std::vector<std::size_t> live_comp_start(f.components() + 1, 0);
    for (int c = 0; c < f.components(); ++c) {
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1) {
                const Complex z = f.coef(c, std::size_t(i0) * n + i1);
                if (z != 0.0) live.push_back({i0, i1, z});
            }
        live_comp_start[c + 1] = live.size();
    }
    std::vector<Complex> ph0(n), ph1(n);
    for (std::size_t pi = 0; pi < npts; ++pi) {
        const double x0 = points[2 * pi], x1 = points[2 * pi + 1];
        for (int i = 0; i < n; ++i) {
            const double xi = g.k0() * g.mode_of(i);
            ph0[i] = std::polar(1.0, xi * x0);
            ph1[i] = std::polar(1.0, xi * x1);
        }
        for (int c = 0; c < f.components(); ++c) {
            Complex acc = 0.0;
            for (std::size_t k = live_comp_start[c]; k < live_comp_start[c + 1]; ++k)
                acc += live[k].coef * ph0[live[k].i0] * ph1[live[k].i1];
            out[std::size_t(c) * npts + pi] = acc.real();
        }
    }
    return out;
}

void save_snapshot(const std::string& path, const SpectralField& f) {
    std::ofstream os(path);
    if (!os) throw UsageError("save_snapshot: cannot open " + path);
    const auto& g = f.grid();
    os << g.dim << ',' << g.n << ',';
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", g.length);
    os << buf << ',' << f.components() << '\n';
    for (double s : f.to_samples()) {
        std::snprintf(buf, sizeof buf, "%.17g", s);
        os << buf << '\n';
    }
}

SpectralField load_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("load_snapshot: cannot open " + path);
    std::string header;
    std::getline(is, header);
    PeriodicGrid g;
    int comps = 1;
    {
        std::istringstream hs(header);
        char comma;
        if (!(hs >> g.dim >> comma >> g.n >> comma >> g.length >> comma >> comps))
            throw UsageError("load_snapshot: malformed header in " + path);
    }
    g.validate();
    std::vector<double> samples(g.size() * std::size_t(comps));
    for (auto& s : samples)
        if (!(is >> s)) throw UsageError("load_snapshot: truncated sample data in " + path);
    return SpectralField::from_samples(g, samples, comps);
}

} // namespace nklab
