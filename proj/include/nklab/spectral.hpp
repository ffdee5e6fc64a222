#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nklab {

using Complex = std::complex<double>;

/// Uniform periodic grid on [0, L)^dim, dim in {1,2}, n a power of two per
/// axis. Wavenumbers are xi_k = 2 pi k / L with integer k in [-n/2, n/2).
struct PeriodicGrid {
    int dim = 1;
    int n = 64;
    double length = 6.283185307179586476925286766559; // 2 pi

    std::size_t size() const { return dim == 1 ? std::size_t(n) : std::size_t(n) * n; }
    double k0() const { return 2.0 * 3.141592653589793238462643383279502884 / length; }
    int mode_of(int i) const { return i < n / 2 ? i : i - n; }
    int slot_of(int k) const { return k >= 0 ? k : k + n; }
    /// Wavevector of a flat index; second entry is 0 in 1D.
    std::array<double, 2> wavevector(std::size_t flat) const;
    std::array<int, 2> modes(std::size_t flat) const;
    double xi_norm2(std::size_t flat) const;
    /// Largest |k| per axis that keeps quadratic products alias-free (2/3 rule).
    int band_limit() const { return n / 3; }
    void validate() const;
    bool operator==(const PeriodicGrid&) const = default;
};

/// Complex Fourier coefficients of a (usually real) field on a PeriodicGrid.
///
/// Convention, used everywhere: coefficients are Fourier-series coefficients,
///   f(x) = sum_k coef_k e^{i xi_k . x},   coef_k = (1/N) sum_m f(x_m) e^{-i xi_k . x_m},
/// so Parseval reads  (L^d/N) sum_m |f(x_m)|^2 = L^d sum_k |coef_k|^2, and
/// l2() returns sqrt(L^d sum |coef|^2) = physical L^2 norm.
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(const PeriodicGrid& g, int components);

    static SpectralField from_samples(const PeriodicGrid& g, std::span<const double> samples,
                                      int components = 1);
    /// Inverse transform; imaginary residue is discarded.
    std::vector<double> to_samples() const;

    const PeriodicGrid& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t size() const { return grid_.size(); }

    Complex& coef(int c, std::size_t idx) { return coef_[std::size_t(c) * grid_.size() + idx]; }
    const Complex& coef(int c, std::size_t idx) const {
        return coef_[std::size_t(c) * grid_.size() + idx];
    }
    std::span<const Complex> coefs(int c) const {
        return {coef_.data() + std::size_t(c) * grid_.size(), grid_.size()};
    }
    std::span<Complex> coefs(int c) {
        return {coef_.data() + std::size_t(c) * grid_.size(), grid_.size()};
    }

    /// Set mode k (and its conjugate at -k when conj_pair, keeping the field real).
    void set_mode(int c, std::array<int, 2> k, Complex v, bool conj_pair = true);
    Complex mode(int c, std::array<int, 2> k) const;

    void zero_mean();
    Complex mean(int c = 0) const { return coef(c, 0); }

    double l2() const;
    double linf() const;

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

private:
    PeriodicGrid grid_;
    int components_ = 1;
    std::vector<Complex> coef_;
};

/// Coefficient-wise product with a scalar symbol m(xi); m({0,0}) must be finite.
SpectralField apply_multiplier(const SpectralField& f,
                               const std::function<Complex(std::array<double, 2>)>& m);

SpectralField derivative(const SpectralField& f, int axis);
SpectralField gradient_field(const SpectralField& scalar); // components = dim
SpectralField divergence(const SpectralField& u);          // scalar

struct HelmholtzParts {
    SpectralField v; // Lambda^{-1} div u  (compressible potential)
    SpectralField w; // Lambda^{-1} curl u (scalar in 2D, identically zero in 1D)
};

/// Requires zero-mean u. Reconstruction via helmholtz_recompose is exact.
HelmholtzParts helmholtz_split(const SpectralField& u);
SpectralField helmholtz_recompose(const SpectralField& v, const SpectralField& w, int dim);

/// (e^{-eps^2 xi2} - 1)/eps^2 : symbol of L_eps f = (phi_eps * f - f)/eps^2.
double capillary_symbol(double xi2, double eps);
SpectralField capillary_op(const SpectralField& f, double eps);

/// tau_{-eps y} f + tau_{eps y} f - 2 f, exact on the grid via phase shifts.
SpectralField symmetric_difference(const SpectralField& f, std::array<double, 2> y, double eps);

/// Real, zero-mean field with independent Gaussian modes supported in
/// |k_axis| <= kmax, normalized so l2() == amplitude. Deterministic in seed.
SpectralField random_band_limited(const PeriodicGrid& g, int components, int kmax,
                                  std::uint64_t seed, double amplitude = 1.0);

/// Throws NumericalError when relative energy beyond |k_axis| <= kmax exceeds rel_tol.
void assert_band_limited(const SpectralField& f, int kmax, double rel_tol = 1e-8);

/// Physical-space product. scalar*scalar -> scalar, scalar*vector -> vector,
/// vector.vector -> scalar (dot).
SpectralField pointwise_product(const SpectralField& a, const SpectralField& b);

/// Evaluate the Fourier series at arbitrary points (layout x0,y0,x1,y1,...;
/// just x0,x1,... in 1D). Exact for the stored modes. Result is component-major.
std::vector<double> evaluate_at_points(const SpectralField& f, std::span<const double> points);

void save_snapshot(const std::string& path, const SpectralField& f);
SpectralField load_snapshot(const std::string& path);

} // namespace nklab
