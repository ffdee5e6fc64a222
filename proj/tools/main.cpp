// nklab: configuration-driven experiment runner for the nonlocal Korteweg
// laboratory. One subcommand per experiment; exit codes: 0 pass, 1 assertion
// failure, 2 usage error, 3 numerical failure.
#include <CLI11.hpp>

#include <chrono>
#include <exception>
#include <iostream>
#include <string>

#include "nklab/errors.hpp"
#include "nklab/experiments.hpp"

namespace {

int run(const std::string& experiment, const std::string& config_path, const std::string& out,
        const std::string& format, long long seed, bool seed_set) {
    using clock = std::chrono::steady_clock;
    nklab::ExperimentConfig cfg = config_path.empty()
                                      ? nklab::ExperimentConfig{}
                                      : nklab::ExperimentConfig::from_json_file(config_path);
    cfg.experiment = experiment;
    if (!out.empty()) cfg.out = out;
    if (!format.empty()) cfg.format = format;
    if (seed_set) cfg.seed = std::uint64_t(seed);
    cfg.validate();

    const auto t0 = clock::now();
    const auto result = nklab::run_experiment(cfg);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count();
    if (result.exit_code == 3) {
        std::cerr << "numerical failure: " << result.detail << "\n";
        return 3;
    }
    nklab::emit_table(cfg, result.table);
    std::cerr << experiment << ": " << result.table.size() << " rows in " << ms << " ms"
              << " (config " << std::hex << cfg.config_hash() << std::dec << ")\n";
    if (result.exit_code != 0) {
        std::cerr << "assertion failed: " << result.detail << "\n";
        return result.exit_code;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal Korteweg laboratory"};
    app.require_subcommand(1);

    std::string config_path, out, format;
    long long seed = 0;
    bool seed_set = false;

    const char* names[] = {"thresholds",      "propagator_verify", "norm_equivalence",
                           "flow_commutator", "converge",          "apriori_check"};
    std::string chosen;
    for (const char* name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON experiment config");
        sub->add_option("--out", out, "output path (default: stdout)");
        sub->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
        return run(chosen, config_path, out, format, seed, seed_set);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const nklab::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const nklab::AssertionError& e) {
        std::cerr << "assertion failed: " << e.what() << "\n";
        return 1;
    } catch (const nklab::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
