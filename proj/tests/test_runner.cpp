#include "doctest.h"

#include <filesystem>
#include <string>
#include <unistd.h>

#include "json.hpp"

#include "ccot/errors.hpp"
#include "ccot/io.hpp"
#include "ccot/runner.hpp"

using namespace ccot;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("ccot_runner_test_" + std::to_string(static_cast<unsigned long>(::getpid())));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string scratch(const std::string& name) { return (scratch_dir() / name).string(); }

// Minimal well-formed config; tests mutate the parsed JSON before
// re-serializing, so each case states only its own deviation.
json base_config() {
    return json::parse(R"({
        "domain": {"x_min": 0, "x_max": 1, "y_min": 0, "y_max": 1},
        "grid": {"nx": 16, "ny": 16},
        "mixture": [
            {"mean": [0.3, 0.3], "cov_diag": [0.2, 0.2], "weight": 0.5},
            {"mean": [0.7, 0.7], "cov_diag": [0.2, 0.2], "weight": 0.5}
        ],
        "classifier": {"id": "f1"},
        "delta": 0.2,
        "cost": {"kind": "squared_euclidean"},
        "solver": {"name": "sinkhorn"}
    })");
}

RunConfig parse(const json& j) { return parse_config_text(j.dump()); }

}  // namespace

TEST_CASE("solver names round trip through their strings") {
    for (SolverName n : {SolverName::none, SolverName::classic, SolverName::sinkhorn,
                         SolverName::uot, SolverName::bfm}) {
        CHECK(solver_name_from_string(to_string(n)) == n);
    }
    CHECK_THROWS_AS(solver_name_from_string("gradient"), ConfigError);
}

TEST_CASE("a well-formed config parses with documented defaults") {
    const RunConfig cfg = parse(base_config());
    CHECK(cfg.domain.nx == 16);
    CHECK(cfg.domain.ny == 16);
    CHECK(cfg.mixture.components.size() == 2);
    CHECK(cfg.classifier_id == "f1");
    CHECK(cfg.delta == 0.2);
    CHECK(cfg.cost_kind == CostKind::squared_euclidean);
    CHECK(cfg.solver.name == SolverName::sinkhorn);
    CHECK(cfg.solver.epsilon == 0.0);  // resolved against the cost at run time
    CHECK(cfg.solver.max_iters == 10000);
    CHECK(cfg.solver.tol == 1e-9);
    CHECK(!cfg.samples.has_value());
    CHECK(!cfg.paths.has_value());
}

TEST_CASE("unknown and missing keys are reported by name") {
    json j = base_config();
    j["typo_key"] = 1;
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("typo_key"), ConfigError);

    j = base_config();
    j.erase("delta");
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("delta"), ConfigError);

    j = base_config();
    j["grid"].erase("ny");
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("ny"), ConfigError);

    j = base_config();
    j["solver"]["lambda2"] = 0.5;  // a sinkhorn solver takes no lambdas
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("lambda2"), ConfigError);

    CHECK_THROWS_AS(parse_config_text("not json at all"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[1,2,3]"), ConfigError);
}

TEST_CASE("field values are validated with their cross-field rules") {
    json j = base_config();
    j["delta"] = 0.0;
    CHECK_THROWS_AS(parse(j), ConfigError);

    j = base_config();
    j["delta"] = 1.0;
    CHECK_THROWS_AS(parse(j), ConfigError);

    j = base_config();
    j["classifier"]["id"] = "f9";
    CHECK_THROWS_AS(parse(j), ConfigError);

    j = base_config();
    j["mixture"][0]["weight"] = 0.4;  // weights no longer sum to 1
    CHECK_THROWS_AS(parse(j), ConfigError);

    j = base_config();
    j["grid"]["nx"] = 1;
    CHECK_THROWS_AS(parse(j), ConfigError);

    // cost.p is exclusive to the p_power kind, and must exceed 1 there.
    j = base_config();
    j["cost"]["p"] = 3.0;
    CHECK_THROWS_AS(parse(j), ConfigError);
    j = base_config();
    j["cost"] = {{"kind", "p_power"}};
    CHECK_THROWS_AS(parse(j), ConfigError);
    j["cost"] = {{"kind", "p_power"}, {"p", 1.0}};
    CHECK_THROWS_AS(parse(j), ConfigError);
    j["cost"] = {{"kind", "p_power"}, {"p", 3.0}};
    CHECK(parse(j).cost_p == 3.0);

    // Interpolation frames assume the quadratic-cost map from the grid
    // solver, and that solver rejects any other ground cost.
    j = base_config();
    j["paths"] = {{"frames", 5}};
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("bfm"), ConfigError);

    j = base_config();
    j["solver"] = {{"name", "bfm"}};
    j["cost"] = {{"kind", "euclidean"}};
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("squared_euclidean"), ConfigError);

    j = base_config();
    j["solver"] = {{"name", "bfm"}};
    j["paths"] = {{"frames", 1}};
    CHECK_THROWS_AS(parse(j), ConfigError);

    j = base_config();
    j["samples"] = {{"n", 0}, {"seed", 17}};
    CHECK_THROWS_AS(parse(j), ConfigError);
    j["samples"] = {{"n", 10}, {"seed", -3}};
    CHECK_THROWS_AS(parse(j), ConfigError);
}

TEST_CASE("solver-specific defaults are filled during parsing") {
    json j = base_config();
    j["solver"] = {{"name", "bfm"}};
    const RunConfig bfm = parse(j);
    CHECK(bfm.solver.sigma0 == 1.0);
    CHECK(bfm.solver.max_iters == 2000);
    CHECK(bfm.solver.tol == 0.01);

    j["solver"] = {{"name", "uot"}, {"lambda2", 0.25}};
    const RunConfig uot = parse(j);
    CHECK(uot.solver.lambda1 == 1.0);
    CHECK(uot.solver.lambda2 == 0.25);
    CHECK(uot.solver.max_iters == 10000);

    j["solver"] = {{"name", "uot"}, {"lambda1", -0.1}};
    CHECK_THROWS_AS(parse(j), ConfigError);
}

TEST_CASE("serialized configs parse back to the same configuration") {
    json j = base_config();
    j["solver"] = {{"name", "uot"}, {"epsilon", 0.02}, {"lambda2", 0.5}};
    j["samples"] = {{"n", 25}, {"seed", 99}};
    const RunConfig cfg = parse(j);
    const RunConfig back = parse_config_text(config_to_json_text(cfg));
    CHECK(back.domain.same_grid(cfg.domain));
    CHECK(back.classifier_id == cfg.classifier_id);
    CHECK(back.delta == cfg.delta);
    CHECK(back.cost_kind == cfg.cost_kind);
    CHECK(back.solver.name == cfg.solver.name);
    CHECK(back.solver.epsilon == cfg.solver.epsilon);
    CHECK(back.solver.lambda2 == cfg.solver.lambda2);
    REQUIRE(back.samples.has_value());
    CHECK(back.samples->n == 25);
    CHECK(back.samples->seed == 99);
}

TEST_CASE("load_config reports unreadable files as configuration errors") {
    CHECK_THROWS_AS(load_config(scratch("no_such_config.json")), ConfigError);
    const std::string path = scratch("config.json");
    write_text_file(path, base_config().dump());
    CHECK(load_config(path).solver.name == SolverName::sinkhorn);
}

TEST_CASE("grid-mode instances put weighted cell centers on both sides") {
    const RunConfig cfg = parse(base_config());
    const ProblemInstance inst = build_instance(cfg);
    CHECK(!inst.point_mode);
    REQUIRE(!inst.src_points.empty());
    REQUIRE(!inst.tgt_points.empty());
    CHECK(inst.src_points.size() == inst.src_weights.size());
    CHECK(inst.tgt_points.size() == inst.tgt_weights.size());
    CHECK(inst.cost.n == static_cast<int>(inst.src_points.size()));
    CHECK(inst.cost.m == static_cast<int>(inst.tgt_points.size()));

    // Each side's weights mirror its truncated grid and sum to 1.
    double src_total = 0.0, tgt_total = 0.0;
    for (double w : inst.src_weights) src_total += w;
    for (double w : inst.tgt_weights) tgt_total += w;
    CHECK(src_total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(tgt_total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(inst.region.achieved_prob >= cfg.delta);

    // The grid solver consumes densities directly: no point clouds, no
    // cost matrix.
    json j = base_config();
    j["solver"] = {{"name", "bfm"}};
    const ProblemInstance grid_inst = build_instance(parse(j));
    CHECK(grid_inst.src_points.empty());
    CHECK(grid_inst.cost.v.empty());
    CHECK(grid_inst.source_density.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(grid_inst.target_density.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("point-mode instances draw both clouds from one seed") {
    json j = base_config();
    j["samples"] = {{"n", 12}, {"seed", 17}};
    const RunConfig cfg = parse(j);
    const ProblemInstance inst = build_instance(cfg);
    CHECK(inst.point_mode);
    CHECK(inst.src_points.size() == 12);
    CHECK(inst.tgt_points.size() == 12);
    CHECK(inst.source_seed == 17);
    CHECK(inst.target_seed != 17);  // derived stream, not the same draws

    const ProblemInstance again = build_instance(cfg);
    for (std::size_t i = 0; i < inst.src_points.size(); ++i) {
        CHECK(inst.src_points[i].x == again.src_points[i].x);
        CHECK(inst.src_points[i].y == again.src_points[i].y);
    }
}

TEST_CASE("preset stages match their published shapes") {
    const auto fig4 = preset_stages("fig4");
    REQUIRE(fig4.size() == 1);
    CHECK(fig4[0].dir == "regions");
    CHECK(fig4[0].config.solver.name == SolverName::none);
    CHECK(fig4[0].sweep_values.empty());

    const auto fig5 = preset_stages("fig5");
    REQUIRE(fig5.size() == 5);
    CHECK(fig5[0].dir == "classic");
    CHECK(fig5[1].dir == "sinkhorn");
    CHECK(fig5[2].dir == "uot_lambda2_0");
    CHECK(fig5[3].dir == "uot_lambda2_05");
    CHECK(fig5[4].dir == "uot_lambda2_1");
    CHECK(fig5[2].config.solver.lambda2 == 0.0);
    CHECK(fig5[4].config.solver.lambda2 == 1.0);
    for (const auto& st : fig5) {
        CHECK(st.config.cost_kind == CostKind::euclidean);
        REQUIRE(st.config.samples.has_value());
        CHECK(st.config.samples->n == 100);
        CHECK(st.config.samples->seed == 17);
    }

    const auto fig6 = preset_stages("fig6");
    REQUIRE(fig6.size() == 1);
    CHECK(fig6[0].config.solver.name == SolverName::uot);
    REQUIRE(fig6[0].sweep_values.size() == 11);
    CHECK(fig6[0].sweep_values.front() == 0.0);
    CHECK(fig6[0].sweep_values.back() == 1.0);

    const auto fig7 = preset_stages("fig7");
    REQUIRE(fig7.size() == 1);
    CHECK(fig7[0].config.classifier_id == "f3");

    const auto fig8 = preset_stages("fig8");
    REQUIRE(fig8.size() == 1);
    CHECK(fig8[0].dir == "flow");
    CHECK(fig8[0].config.solver.name == SolverName::bfm);
    CHECK(fig8[0].config.solver.tol == 0.04);
    REQUIRE(fig8[0].config.paths.has_value());
    CHECK(fig8[0].config.paths->frames == 5);

    CHECK_THROWS_AS(preset_stages("fig9"), ConfigError);
}

TEST_CASE("experiments write a parseable manifest and byte-stable artifacts") {
    json j = base_config();
    // A generous blur keeps the smoke solve far from the slow-mixing regime
    // so convergence inside the default iteration budget is guaranteed.
    j["solver"] = {{"name", "sinkhorn"}, {"epsilon", 0.05}, {"tol", 1e-7}};
    const RunConfig cfg = parse(j);
    const std::string dir_a = scratch("run_a");
    const std::string dir_b = scratch("run_b");
    const RunResult res = run_experiment(cfg, dir_a, "run", "", true);
    run_experiment(cfg, dir_b, "run", "", true);

    const json manifest = json::parse(read_text_file(dir_a + "/manifest.json"));
    CHECK(manifest["tool"] == "ccot");
    CHECK(manifest["command"] == "run");
    CHECK(manifest["config"]["solver"]["name"] == "sinkhorn");
    CHECK(manifest["derived"].contains("total_cost"));
    CHECK(manifest["derived"].contains("epsilon_resolved"));
    CHECK(manifest["derived"]["converged"] == true);

    // Every listed output exists on disk.
    for (const auto& name : res.outputs) {
        CHECK(fs::exists(fs::path(dir_a) / std::string(name)));
    }

    // Wall-clock data is quarantined in timings.json; all other artifacts
    // are byte-identical across reruns.
    for (const auto& name : res.outputs) {
        if (name == "timings.json") continue;
        CHECK(read_text_file(dir_a + "/" + std::string(name)) ==
              read_text_file(dir_b + "/" + std::string(name)));
    }
}

TEST_CASE("regions-only runs skip solver artifacts") {
    json j = base_config();
    j["solver"] = {{"name", "none"}};
    const std::string dir = scratch("run_none");
    const RunResult res = run_experiment(parse(j), dir, "run", "", true);
    for (const auto& name : res.outputs) {
        CHECK(name != "plan.csv");
        CHECK(name != "baseline.csv");
    }
    CHECK(fs::exists(fs::path(dir) / "source_mask.csv"));
    CHECK(fs::exists(fs::path(dir) / "target_mask.csv"));
}

TEST_CASE("lambda2 sweeps emit one row per requested value") {
    json j = base_config();
    j["grid"] = {{"nx", 12}, {"ny", 12}};
    j["solver"] = {{"name", "uot"}, {"epsilon", 0.05}};
    const RunConfig cfg = parse(j);
    const std::string dir = scratch("sweep");
    sweep_lambda2(cfg, {0.0, 0.5, 1.0}, dir, "", true);
    const std::string text = read_text_file(dir + "/sweep.csv");
    int lines = 0;
    for (char c : text) lines += (c == '\n') ? 1 : 0;
    CHECK(lines == 4);  // header plus three rows
    const json manifest = json::parse(read_text_file(dir + "/manifest.json"));
    CHECK(manifest["command"] == "sweep");
    CHECK(manifest["sweep_values"].size() == 3);

    // Only the marginal-relaxation solver has a lambda2 to sweep.
    CHECK_THROWS_AS(sweep_lambda2(parse(base_config()), {0.5}, scratch("sweep_bad"), "", true),
                    ConfigError);
    CHECK_THROWS_AS(sweep_lambda2(cfg, {}, scratch("sweep_bad"), "", true), ConfigError);
    CHECK_THROWS_AS(sweep_lambda2(cfg, {-0.5}, scratch("sweep_bad"), "", true), ConfigError);
}
