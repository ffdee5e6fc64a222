#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nklab/littlewood_paley.hpp"
#include "nklab/params.hpp"
#include "nklab/spectral.hpp"
#include "nklab/table.hpp"

namespace nklab {

struct GridSpec {
    int dim = 1;
    int n = 256;
    double length = 6.283185307179586476925286766559;
    PeriodicGrid make() const;
};

/// One experiment per invocation. Unknown config keys are rejected with the
/// offending field path; all values are validated before any compute.
struct ExperimentConfig {
    std::string experiment; // thresholds | propagator_verify | norm_equivalence |
                            // flow_commutator | converge | apriori_check
    PhysicalParams params;
    GridSpec grid;
    std::vector<double> eps_list{1.0, 0.1, 0.01};
    std::vector<double> nu_list;    // apriori sweep (empty: params.nu only)
    std::vector<double> kappa_list; // apriori sweep
    std::vector<double> p_list;     // apriori sweep
    std::vector<double> t_values{0.05, 0.1};
    int j_min = -6;
    int j_max = 10;
    double T = 1.0;
    int steps = 400;
    double s = 1.0;
    double sigma = 0.5;
    double amplitude = 0.01;
    double v_amplitude = 0.002; // transport field strength (apriori_check)
    double gamma = 1.0;         // hybrid-norm threshold constant
    double k_probe = 1.0;
    int n_xi = 9;
    int n_fields = 50;
    int substeps = 16;
    std::string variant = "nonlinear"; // converge: linear | nonlinear
    std::uint64_t seed = 0;
    std::string out;            // empty: stdout
    std::string format = "csv"; // csv | json

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
    void validate() const;
    /// Canonical key=value serialization; its fnv1a hash stamps every table.
    std::string canonical() const;
    std::uint64_t config_hash() const;
};

struct RunResult {
    Table table;
    int exit_code = 0;  // 0 pass, 1 assertion failure, 3 numerical failure
    std::string detail; // failing assertion or error text
};

/// Dispatch, run, and append the config hash column. Does not write files.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Serialize and atomically write a finished table per cfg.out/cfg.format.
void emit_table(const ExperimentConfig& cfg, const Table& table);

/// A-priori inequality check over the (eps, nu, kappa, p) sweep.
Table apriori_check(const ExperimentConfig& cfg, double* max_over_min = nullptr);

struct AdvectedTrajectory {
    TimeSeriesField q;
    TimeSeriesField u;
};

/// The advected linear system: exact linear flow per mode plus an
/// exponential-Heun treatment of (-v.grad q + e^{-t} F0, -v.grad u + e^{-t} G0).
/// With v = F0 = G0 = 0 this is the plain linear evolution. Throws
/// NumericalError when the explicit transport violates its CFL bound.
AdvectedTrajectory advected_linear_trajectory(const SpectralField& q0, const SpectralField& u0,
                                              const SpectralField& v, const SpectralField& F0,
                                              const SpectralField& G0, double T, int steps,
                                              const PhysicalParams& P, int snapshot_stride = 1);

} // namespace nklab
