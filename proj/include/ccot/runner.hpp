#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccot/classifier.hpp"
#include "ccot/cost.hpp"
#include "ccot/measures.hpp"

namespace ccot {

enum class SolverName { none, classic, sinkhorn, uot, bfm };

SolverName solver_name_from_string(const std::string& s);
std::string to_string(SolverName name);

// Solver settings as they appear in a config file.  epsilon <= 0 means
// "resolve to 0.01 * mean(C) at run time"; the resolved value is recorded in
// the manifest.  max_iters and tol defaults depend on the solver and are
// filled during parsing.
struct SolverConfig {
    SolverName name = SolverName::none;
    double epsilon = 0.0;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    int max_iters = 10000;
    double tol = 1e-9;
    double sigma0 = 1.0;
};

struct SamplesConfig {
    int n = 100;
    std::uint64_t seed = 17;
};

struct PathsConfig {
    int frames = 5;
};

// One experiment: mixture density on a grid, a classifier, the confidence
// band, a cost, and at most one solver.
struct RunConfig {
    Domain domain;
    GaussianMixture mixture;
    std::string classifier_id = "f1";
    double delta = 0.2;
    CostKind cost_kind = CostKind::squared_euclidean;
    double cost_p = 2.0;
    SolverConfig solver;
    std::optional<SamplesConfig> samples;
    std::optional<PathsConfig> paths;
};

// Strict JSON parsing: every unknown key and every missing required key
// raises ConfigError naming the key and its location.  Cross-field rules
// (paths require the bfm solver, bfm requires the squared Euclidean cost)
// are enforced here as well.
RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);

// The exact configuration a run consumed, serialized back to JSON; embedded
// in the manifest so the manifest alone suffices to re-run.
std::string config_to_json_text(const RunConfig& cfg);

// The discrete problem a solver sees.  In point mode (a samples section is
// present) both sides are uniform clouds rejection-sampled from the mixture
// inside their regions; otherwise the positive-mass cells of the truncated
// grids act as weighted point sets.  Solver "none" skips points and cost.
struct ProblemInstance {
    double renorm_factor = 1.0;
    GridDensity density;
    ConfidenceRegion region;
    GridDensity source_density;
    GridDensity target_density;
    bool point_mode = false;
    std::uint64_t source_seed = 0;
    std::uint64_t target_seed = 0;
    std::vector<Vec2> src_points, tgt_points;
    std::vector<double> src_weights, tgt_weights;
    CostMatrix cost;
};

ProblemInstance build_instance(const RunConfig& cfg);

struct RunResult {
    std::string out_dir;
    std::vector<std::string> outputs;  // artifact names relative to out_dir
};

// Full pipeline: density -> regions -> truncation -> solve -> metrics ->
// optional interpolation frames.  Writes CSV/PGM artifacts plus
// manifest.json and timings.json into out_dir (created if needed).  Wall
// times go only into timings.json so everything else is byte-stable across
// reruns.  figure_id, when nonempty, is recorded in the manifest.
RunResult run_experiment(const RunConfig& cfg, const std::string& out_dir,
                         const std::string& command = "run", const std::string& figure_id = "",
                         bool quiet = false);

// One marginal-relaxation solve per lambda2 value on a fixed instance;
// emits the sweep CSV with cost and divergence columns per value.
RunResult sweep_lambda2(const RunConfig& cfg, const std::vector<double>& values,
                        const std::string& out_dir, const std::string& figure_id = "",
                        bool quiet = false);

// Pinned presets fig4..fig8.  A preset is an ordered list of stages, each a
// run (or a lambda2 sweep) in its own subdirectory.
struct PresetStage {
    std::string dir;
    RunConfig config;
    std::vector<double> sweep_values;  // nonempty marks a sweep stage
};

std::vector<PresetStage> preset_stages(const std::string& figure_id);

// Executes every stage of the preset under out_dir and writes a top-level
// manifest listing them.  seed_override replaces the sample seed in every
// stage that draws samples.
RunResult reproduce(const std::string& figure_id, const std::string& out_dir, bool quiet = false,
                    std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace ccot
