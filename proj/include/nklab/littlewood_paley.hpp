#pragma once

#include <vector>

#include "nklab/spectral.hpp"
#include "nklab/table.hpp"

namespace nklab {

/// Homogeneous dyadic decomposition. chi is a smooth radial cutoff, == 1 on
/// |xi| <= 3/4 and supported in |xi| <= 4/3, built from the e^{-1/x} bump so
/// the telescoping partition identity holds to machine precision. phi(xi) =
/// chi(xi/2) - chi(xi) is supported in the annulus [c0, C0] = [3/4, 8/3].
struct DyadicPartition {
    static constexpr double c0 = 0.75;
    static constexpr double C0 = 8.0 / 3.0;

    PeriodicGrid grid;
    int j_min = 0;
    int j_max = 0;

    explicit DyadicPartition(const PeriodicGrid& g);

    static double chi(double r);
    static double phi(double r) { return chi(0.5 * r) - chi(r); }

    /// Delta_j f (multiplier phi(2^{-j}|xi|)).
    SpectralField block(const SpectralField& f, int j) const;
    /// S_j f (multiplier chi(2^{-j}|xi|)).
    SpectralField low_pass(const SpectralField& f, int j) const;
    /// ||Delta_j f||_{L^2}, computed spectrally (no transform).
    double block_l2(const SpectralField& f, int j) const;
};

/// || f ||_{B^s_{p,r}} with p in {2, inf} and r in {1, 2, inf}.
double besov_norm(const SpectralField& f, double s, double p_idx, double r);

enum class HybridForm { index, multiplier, minform, fdform };

struct HybridSpec {
    double s_low = 0.0;  // exponent below the threshold block
    double s_high = 0.0; // exponent above it (with the eps^-2 weight)
    double eps = 1.0;
    double gamma = 1.0;
    int l_eps() const;
    double weight(int j) const;
};

/// General two-exponent hybrid norm in index form (the defining sum).
double hybrid_index_norm(const SpectralField& f, const HybridSpec& spec);

/// The four equivalent realizations of || f ||_{B_eps^{s+2,s}}:
///   index      sum_{l<=l_eps} 2^{l(s+2)} ||Delta_l f|| + sum_{l>l_eps} eps^-2 2^{ls} ||Delta_l f||
///   multiplier || (phi_eps * f - f)/eps^2 ||_{B^s_{2,1}}
///   minform    sum_j min(eps^-2, 2^{2j}) 2^{js} ||Delta_j f||
///   fdform     eps^-2 integral e^{-|y|^2/16} ||f(.-eps y)+f(.+eps y)-2f||_{B^s_{2,1}} dy
double hybrid_norm(const SpectralField& f, double s, double eps, HybridForm form,
                   double gamma = 1.0);

/// sum_l 2^{ls} max(alpha, 2^{-l})^{1-2/r} ||Delta_l f||_{L^2}.
double tilde_norm(const SpectralField& f, double alpha, double s, double r);

struct TimeSeriesField {
    std::vector<double> times;
    std::vector<SpectralField> fields;
    void validate() const;
};

/// Chemin-Lerner norm: per-block time norm (rho in {1, inf}) first, then the
/// weighted l^1 sum over blocks.
double chemin_lerner(const TimeSeriesField& traj, double rho, double s);

/// tilde-L^1 in time of the two-exponent hybrid norm.
double chemin_lerner_hybrid(const TimeSeriesField& traj, const HybridSpec& spec);

/// ||(q,u)||_{E_eps^s} = ||u||_{L~inf B^{s-1}} + ||q||_{L~inf B^{s-1}} + ||q||_{L~inf B^s}
///   + ||u||_{L~1 B^{s+1}} + ||q||_{L~1 B_eps^{s+1,s}} + ||q||_{L~1 B_eps^{s+2,s}}.
double energy_norm(const TimeSeriesField& q_traj, const TimeSeriesField& u_traj, double s,
                   double eps, double gamma = 1.0);

struct BonyParts {
    SpectralField para_uv; // T_u v
    SpectralField para_vu; // T_v u
    SpectralField remainder;
};

/// Bony decomposition of the pointwise product; the three parts sum to u.v.
BonyParts bony_decompose(const SpectralField& u, const SpectralField& v);

/// S_{j-1}v . grad(Delta_j h) - Delta_j(v . grad h).
SpectralField transport_commutator(const SpectralField& v, const SpectralField& h, int j);

/// One row per computed norm, columns (norm_name, s, eps, form, value):
/// the Besov norm plus all four hybrid forms of f at regularity s.
Table norm_report(const SpectralField& f, double s, double eps, double gamma = 1.0);

} // namespace nklab
