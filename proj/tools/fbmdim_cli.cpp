// Command-line front end: simulate, sojourn, dims, localtime, verify, figure1.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "fbmdim/config.hpp"
#include "fbmdim/errors.hpp"
#include "fbmdim/experiment.hpp"
#include "fbmdim/fbm.hpp"
#include "fbmdim/path_io.hpp"
#include "fbmdim/sojourn.hpp"
#include "fbmdim/verify.hpp"

namespace {

using namespace fbmdim;

constexpr int kExitCriterion = 1;
constexpr int kExitConfig = 2;

/// Experiment flags shared by the run subcommands; each maps to a config key.
struct ExperimentFlags {
    std::map<std::string, std::string> values;
    std::string config_file;

    void attach(CLI::App* app) {
        static const std::pair<const char*, const char*> flags[] = {
            {"--experiment", "experiment"},
            {"--hurst", "h"},
            {"--gamma", "gamma"},
            {"--horizon-exponent,-N", "horizon_exponent"},
            {"--resolution-exponent,-r", "resolution_exponent"},
            {"--replicas", "replicas"},
            {"--rho-step", "rho_step"},
            {"--fit-min", "fit_min"},
            {"--fit-max", "fit_max"},
            {"--seed", "base_seed"},
            {"--out", "output_dir"},
            {"--generator", "generator"},
            {"--variant", "variant"},
            {"--level", "level"},
            {"--level-bandwidth", "level_bandwidth"},
            {"--relative-bandwidth", "relative_bandwidth"},
            {"--epsilon-exponents", "epsilon_exponents"},
            {"--gammas", "gammas"},
            {"--fine-resolution", "fine_resolution"},
            {"--threads", "threads"},
        };
        for (const auto& [flag, key] : flags) {
            app->add_option_function<std::string>(
                flag, [this, k = std::string(key)](const std::string& v) { values[k] = v; },
                std::string("config key ") + key);
        }
        app->add_option("--config", config_file, "key = value file; its entries override flags");
    }

    ExperimentConfig build(ExperimentKind default_kind) const {
        ExperimentConfig config;
        config.experiment = default_kind;
        config.output_dir = std::string("out/") + to_string(default_kind);
        for (const auto& [key, value] : values) {
            apply_config_value(config, key, value);
        }
        if (!config_file.empty()) {
            return load_config(config_file, config);
        }
        config.validate();
        return config;
    }
};

void print_record(const RunRecord& record, const std::filesystem::path& dir) {
    std::cout << "experiment " << to_string(record.experiment) << "  config " << record.config_hash << "  replicas "
              << record.replicas.size() << '\n';
    for (const auto& [name, a] : record.aggregates) {
        std::cout << "  " << name << " = " << a.value;
        if (std::isfinite(a.stderr_value)) {
            std::cout << " (se " << a.stderr_value << ")";
        }
        std::cout << '\n';
    }
    for (const auto& [name, ok] : record.checks) {
        std::cout << "  check " << name << ": " << (ok ? "ok" : "violated") << '\n';
    }
    std::cout << "artifacts in " << dir.string() << '\n';
}

int run_and_write(const ExperimentConfig& config) {
    const RunRecord record = run_experiment(config);
    write_artifacts(record, config.output_dir);
    print_record(record, config.output_dir);
    return 0;
}

void require_kind(const ExperimentConfig& c, std::initializer_list<ExperimentKind> allowed, const char* command) {
    for (auto k : allowed) {
        if (c.experiment == k) {
            return;
        }
    }
    throw ConfigError(std::string("experiment ") + to_string(c.experiment) + " does not belong to '" + command + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional Brownian motion sojourn and level-set dimension toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "synthesize one path and store it in the binary path cache");
    double sim_h = 0.43;
    int sim_n = 10;
    int sim_r = 0;
    std::uint64_t sim_seed = 1;
    std::string sim_generator = "circulant_embedding";
    std::string sim_out = "path.fbm";
    simulate->add_option("--hurst", sim_h, "Hurst index in (0, 1)");
    simulate->add_option("--horizon-exponent,-N", sim_n, "horizon 2^N");
    simulate->add_option("--resolution-exponent,-r", sim_r, "grid step 2^-r");
    simulate->add_option("--seed", sim_seed, "RNG seed");
    simulate->add_option("--generator", sim_generator, "circulant_embedding or cholesky");
    simulate->add_option("--out", sim_out, "output file");

    // sojourn
    auto* sojourn = app.add_subcommand("sojourn", "sojourn-set experiments: theorem1 (default), moments, lemkey");
    ExperimentFlags sojourn_flags;
    sojourn_flags.attach(sojourn);
    std::string sojourn_path;
    sojourn->add_option("--path", sojourn_path, "extract E_gamma from a cached path instead of simulating");

    auto* dims = app.add_subcommand("dims", "dimension experiments: theorem2 (default) or theorem3");
    ExperimentFlags dims_flags;
    dims_flags.attach(dims);

    auto* localtime = app.add_subcommand("localtime", "local-time partial sums (localtime_series)");
    ExperimentFlags localtime_flags;
    localtime_flags.attach(localtime);

    auto* figure1 = app.add_subcommand("figure1", "occupied intervals of E_gamma for plotting");
    ExperimentFlags figure_flags;
    figure_flags.attach(figure1);

    auto* verify = app.add_subcommand("verify", "run the acceptance suite and write verify.json");
    VerifyOptions verify_options;
    std::string verify_out = "out/verify";
    std::vector<int> verify_only;
    verify->add_option("--tolerance-scale", verify_options.tolerance_scale, "multiplies every tolerance");
    verify->add_option("--seed", verify_options.base_seed, "base seed");
    verify->add_option("--threads", verify_options.threads, "worker threads (0: all cores)");
    verify->add_option("--replicas", verify_options.dimension_replicas, "replicas of the dimension experiments");
    verify->add_option("--out", verify_out, "output directory");
    verify->add_option("--only", verify_only, "criterion ids to run")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (simulate->parsed()) {
            if (sim_generator != "circulant_embedding" && sim_generator != "cholesky") {
                throw ConfigError("generator must be circulant_embedding or cholesky");
            }
            if (!(sim_h > 0.0 && sim_h < 1.0)) {
                throw ConfigError("h must lie in (0, 1)");
            }
            const auto gen =
                sim_generator == "cholesky" ? GeneratorId::cholesky : GeneratorId::circulant_embedding;
            const FbmPath path = synthesize_path(HurstIndex(sim_h), sim_n, sim_r, sim_seed, gen);
            save_path(sim_out, path);
            std::cout << "wrote " << path.size() << " samples to " << sim_out << '\n';
            return 0;
        }
        if (sojourn->parsed()) {
            ExperimentConfig config = sojourn_flags.build(ExperimentKind::theorem1);
            require_kind(config, {ExperimentKind::theorem1, ExperimentKind::moments, ExperimentKind::lemkey},
                         "sojourn");
            if (!sojourn_path.empty()) {
                const FbmPath path = load_path(sojourn_path);
                if (!config.gamma) {
                    throw ConfigError("sojourn --path requires gamma");
                }
                if (!(*config.gamma < path.hurst().value())) {
                    throw ConfigError("gamma must be below the Hurst index of the cached path");
                }
                const SojournRecord rec = extract_sojourn(path, GammaExponent(*config.gamma, path.hurst()));
                std::filesystem::create_directories(config.output_dir);
                occupied_cells_table(rec).write(config.output_dir / "cells.csv");
                std::ofstream(config.output_dir / "sojourn.json") << sojourn_summary(rec).dump(2) << '\n';
                figure1_intervals(rec).write(config.output_dir / "figure1.csv");
                std::cout << "wrote cells.csv, sojourn.json and figure1.csv to " << config.output_dir.string() << '\n';
                return 0;
            }
            return run_and_write(config);
        }
        if (dims->parsed()) {
            ExperimentConfig config = dims_flags.build(ExperimentKind::theorem2);
            require_kind(config, {ExperimentKind::theorem2, ExperimentKind::theorem3}, "dims");
            return run_and_write(config);
        }
        if (localtime->parsed()) {
            ExperimentConfig config = localtime_flags.build(ExperimentKind::localtime_series);
            require_kind(config, {ExperimentKind::localtime_series}, "localtime");
            return run_and_write(config);
        }
        if (figure1->parsed()) {
            ExperimentConfig config = figure_flags.build(ExperimentKind::figure1);
            require_kind(config, {ExperimentKind::figure1}, "figure1");
            std::cout << "wrote " << emit_figure1(config).string() << '\n';
            return 0;
        }
        if (verify->parsed()) {
            verify_options.output_dir = verify_out;
            std::filesystem::create_directories(verify_out);
            const auto results = run_verify_suite(
                verify_options,
                [](const CriterionResult& r) { std::cout << r.line() << std::endl; }, verify_only);
            const auto report = to_json(results);
            std::ofstream(std::filesystem::path(verify_out) / "verify.json") << report.dump(2) << '\n';
            return report["passed"].get<bool>() ? 0 : kExitCriterion;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ResourceError& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCriterion;
    }
    return 0;
}
