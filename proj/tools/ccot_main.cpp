#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ccot/errors.hpp"
#include "ccot/runner.hpp"
#include "ccot/version.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto first = tok.find_first_not_of(" \t");
        const auto last = tok.find_last_not_of(" \t");
        if (first == std::string::npos) {
            throw ccot::ConfigError("--values contains an empty entry");
        }
        const std::string trimmed = tok.substr(first, last - first + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(trimmed, &used);
        } catch (const std::exception&) {
            throw ccot::ConfigError("invalid --values entry '" + trimmed + "'");
        }
        if (used != trimmed.size()) {
            throw ccot::ConfigError("invalid --values entry '" + trimmed + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ccot::ConfigError("--values parsed to an empty list");
    return out;
}

void apply_seed_override(ccot::RunConfig& cfg, const std::optional<std::uint64_t>& seed) {
    if (!seed) return;
    if (!cfg.samples) {
        throw ccot::ConfigError("--seed overrides the sample seed, but the config has no samples section");
    }
    cfg.samples->seed = *seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ccot: collective counterfactual explanations via optimal transport"};
    app.set_version_flag("--version", ccot::kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir, figure_id;
    std::string values_text = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    std::uint64_t seed_value = 0;
    int frames_value = 0;
    bool quiet = false;

    CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment from a JSON config");
    run_cmd->add_option("--config", config_path, "JSON config path")->required();
    run_cmd->add_option("--out", out_dir, "Output directory")->required();
    CLI::Option* run_seed = run_cmd->add_option("--seed", seed_value, "Override the sample seed");
    run_cmd->add_flag("--quiet", quiet, "Suppress progress output");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Sweep lambda2 for the uot solver over a list of values");
    sweep_cmd->add_option("--config", config_path, "JSON config path (solver must be uot)")
        ->required();
    sweep_cmd->add_option("--out", out_dir, "Output directory")->required();
    sweep_cmd->add_option("--values", values_text, "Comma-separated lambda2 values");
    CLI::Option* sweep_seed =
        sweep_cmd->add_option("--seed", seed_value, "Override the sample seed");
    sweep_cmd->add_flag("--quiet", quiet, "Suppress progress output");

    CLI::App* rep_cmd = app.add_subcommand("reproduce", "Run a pinned preset (fig4..fig8)");
    rep_cmd->add_option("figure", figure_id, "Preset id: fig4, fig5, fig6, fig7, or fig8")
        ->required();
    rep_cmd->add_option("--out", out_dir, "Output directory")->required();
    CLI::Option* rep_seed = rep_cmd->add_option("--seed", seed_value, "Override the sample seed");
    rep_cmd->add_flag("--quiet", quiet, "Suppress progress output");

    CLI::App* paths_cmd = app.add_subcommand(
        "paths", "Run a bfm config and emit interpolation frames and trajectories");
    paths_cmd->add_option("--config", config_path, "JSON config path (solver must be bfm)")
        ->required();
    paths_cmd->add_option("--out", out_dir, "Output directory")->required();
    CLI::Option* paths_frames =
        paths_cmd->add_option("--frames", frames_value, "Frame count (overrides the config)");
    CLI::Option* paths_seed =
        paths_cmd->add_option("--seed", seed_value, "Override the sample seed");
    paths_cmd->add_flag("--quiet", quiet, "Suppress progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage problems count as config errors
    }

    try {
        if (run_cmd->parsed()) {
            ccot::RunConfig cfg = ccot::load_config(config_path);
            if (run_seed->count() > 0) apply_seed_override(cfg, seed_value);
            ccot::run_experiment(cfg, out_dir, "run", "", quiet);
        } else if (sweep_cmd->parsed()) {
            ccot::RunConfig cfg = ccot::load_config(config_path);
            if (sweep_seed->count() > 0) apply_seed_override(cfg, seed_value);
            ccot::sweep_lambda2(cfg, parse_values(values_text), out_dir, "", quiet);
        } else if (rep_cmd->parsed()) {
            std::optional<std::uint64_t> seed;
            if (rep_seed->count() > 0) seed = seed_value;
            ccot::reproduce(figure_id, out_dir, quiet, seed);
        } else if (paths_cmd->parsed()) {
            ccot::RunConfig cfg = ccot::load_config(config_path);
            if (cfg.solver.name != ccot::SolverName::bfm) {
                throw ccot::ConfigError("the paths command needs solver 'bfm' in the config");
            }
            if (!cfg.paths) cfg.paths = ccot::PathsConfig{5};
            if (paths_frames->count() > 0) {
                if (frames_value < 2) throw ccot::ConfigError("--frames must be at least 2");
                cfg.paths->frames = frames_value;
            }
            if (paths_seed->count() > 0) apply_seed_override(cfg, seed_value);
            ccot::run_experiment(cfg, out_dir, "paths", "", quiet);
        }
    } catch (const ccot::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ccot::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
