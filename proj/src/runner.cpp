#include "ccot/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

#include "ccot/baseline.hpp"
#include "ccot/bfm.hpp"
#include "ccot/errors.hpp"
#include "ccot/io.hpp"
#include "ccot/metrics.hpp"
#include "ccot/paths.hpp"
#include "ccot/rng.hpp"
#include "ccot/sinkhorn.hpp"
#include "ccot/version.hpp"

namespace ccot {

namespace fs = std::filesystem;
using nlohmann::json;

SolverName solver_name_from_string(const std::string& s) {
    if (s == "none") return SolverName::none;
    if (s == "classic") return SolverName::classic;
    if (s == "sinkhorn") return SolverName::sinkhorn;
    if (s == "uot") return SolverName::uot;
    if (s == "bfm") return SolverName::bfm;
    throw ConfigError("unknown solver name '" + s +
                      "' (expected none, classic, sinkhorn, uot, or bfm)");
}

std::string to_string(SolverName name) {
    switch (name) {
        case SolverName::none: return "none";
        case SolverName::classic: return "classic";
        case SolverName::sinkhorn: return "sinkhorn";
        case SolverName::uot: return "uot";
        case SolverName::bfm: return "bfm";
    }
    return "none";
}

namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* a : allowed) {
            if (it.key() == a) {
                known = true;
                break;
            }
        }
        if (!known) config_fail("unknown key '" + it.key() + "' in " + where);
    }
}

const json& need(const json& obj, const std::string& where, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) config_fail("missing key '" + std::string(key) + "' in " + where);
    return *it;
}

double as_number(const json& j, const std::string& what) {
    if (!j.is_number()) config_fail(what + " must be a number");
    return j.get<double>();
}

int as_integer(const json& j, const std::string& what) {
    if (!j.is_number_integer()) config_fail(what + " must be an integer");
    return j.get<int>();
}

std::uint64_t as_seed(const json& j, const std::string& what) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return j.get<std::uint64_t>();
    config_fail(what + " must be a nonnegative integer");
}

std::string as_text(const json& j, const std::string& what) {
    if (!j.is_string()) config_fail(what + " must be a string");
    return j.get<std::string>();
}

Vec2 as_vec2(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) config_fail(what + " must be an array of two numbers");
    return {as_number(j[0], what + "[0]"), as_number(j[1], what + "[1]")};
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_fail(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) config_fail("config root must be a JSON object");
    check_keys(root, "config",
               {"domain", "grid", "mixture", "classifier", "delta", "cost", "solver", "samples",
                "paths"});

    RunConfig cfg;

    const json& jd = need(root, "config", "domain");
    if (!jd.is_object()) config_fail("domain must be an object");
    check_keys(jd, "domain", {"x_min", "x_max", "y_min", "y_max"});
    cfg.domain.x_min = as_number(need(jd, "domain", "x_min"), "domain.x_min");
    cfg.domain.x_max = as_number(need(jd, "domain", "x_max"), "domain.x_max");
    cfg.domain.y_min = as_number(need(jd, "domain", "y_min"), "domain.y_min");
    cfg.domain.y_max = as_number(need(jd, "domain", "y_max"), "domain.y_max");

    const json& jg = need(root, "config", "grid");
    if (!jg.is_object()) config_fail("grid must be an object");
    check_keys(jg, "grid", {"nx", "ny"});
    cfg.domain.nx = as_integer(need(jg, "grid", "nx"), "grid.nx");
    cfg.domain.ny = as_integer(need(jg, "grid", "ny"), "grid.ny");
    try {
        cfg.domain.validate();
    } catch (const std::invalid_argument& e) {
        config_fail(std::string("domain: ") + e.what());
    }

    const json& jm = need(root, "config", "mixture");
    if (!jm.is_array() || jm.empty()) config_fail("mixture must be a nonempty array");
    for (std::size_t k = 0; k < jm.size(); ++k) {
        const std::string where = "mixture[" + std::to_string(k) + "]";
        const json& jc = jm[k];
        if (!jc.is_object()) config_fail(where + " must be an object");
        check_keys(jc, where, {"mean", "cov_diag", "weight"});
        GaussianComponent comp;
        comp.mean = as_vec2(need(jc, where, "mean"), where + ".mean");
        comp.var = as_vec2(need(jc, where, "cov_diag"), where + ".cov_diag");
        comp.weight = as_number(need(jc, where, "weight"), where + ".weight");
        cfg.mixture.components.push_back(comp);
    }
    try {
        cfg.mixture.validate();
    } catch (const std::invalid_argument& e) {
        config_fail(std::string("mixture: ") + e.what());
    }

    const json& jcl = need(root, "config", "classifier");
    if (!jcl.is_object()) config_fail("classifier must be an object");
    check_keys(jcl, "classifier", {"id"});
    cfg.classifier_id = as_text(need(jcl, "classifier", "id"), "classifier.id");
    builtin_score(cfg.classifier_id);  // rejects unknown ids

    cfg.delta = as_number(need(root, "config", "delta"), "delta");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) config_fail("delta must lie in (0, 1)");

    const json& jco = need(root, "config", "cost");
    if (!jco.is_object()) config_fail("cost must be an object");
    check_keys(jco, "cost", {"kind", "p"});
    cfg.cost_kind = cost_kind_from_string(as_text(need(jco, "cost", "kind"), "cost.kind"));
    if (jco.contains("p")) {
        if (cfg.cost_kind != CostKind::p_power) config_fail("cost.p only applies to kind 'p_power'");
        cfg.cost_p = as_number(jco["p"], "cost.p");
        if (!(cfg.cost_p > 1.0)) config_fail("cost.p must exceed 1");
    } else if (cfg.cost_kind == CostKind::p_power) {
        config_fail("missing key 'p' in cost (required for kind 'p_power')");
    }

    const json& js = need(root, "config", "solver");
    if (!js.is_object()) config_fail("solver must be an object");
    cfg.solver.name = solver_name_from_string(as_text(need(js, "solver", "name"), "solver.name"));
    switch (cfg.solver.name) {
        case SolverName::none:
        case SolverName::classic:
            check_keys(js, "solver", {"name"});
            break;
        case SolverName::sinkhorn:
            check_keys(js, "solver", {"name", "epsilon", "max_iters", "tol"});
            break;
        case SolverName::uot:
            check_keys(js, "solver", {"name", "epsilon", "lambda1", "lambda2", "max_iters", "tol"});
            break;
        case SolverName::bfm:
            check_keys(js, "solver", {"name", "sigma0", "max_iters", "tol"});
            break;
    }
    const bool is_entropic =
        cfg.solver.name == SolverName::sinkhorn || cfg.solver.name == SolverName::uot;
    if (is_entropic) {
        cfg.solver.epsilon =
            js.contains("epsilon") ? as_number(js["epsilon"], "solver.epsilon") : 0.0;
        cfg.solver.max_iters =
            js.contains("max_iters") ? as_integer(js["max_iters"], "solver.max_iters") : 10000;
        cfg.solver.tol = js.contains("tol") ? as_number(js["tol"], "solver.tol") : 1e-9;
    }
    if (cfg.solver.name == SolverName::uot) {
        cfg.solver.lambda1 =
            js.contains("lambda1") ? as_number(js["lambda1"], "solver.lambda1") : 1.0;
        cfg.solver.lambda2 =
            js.contains("lambda2") ? as_number(js["lambda2"], "solver.lambda2") : 1.0;
        if (cfg.solver.lambda1 < 0.0 || cfg.solver.lambda2 < 0.0) {
            config_fail("solver.lambda1 and solver.lambda2 must be nonnegative");
        }
    }
    if (cfg.solver.name == SolverName::bfm) {
        cfg.solver.sigma0 = js.contains("sigma0") ? as_number(js["sigma0"], "solver.sigma0") : 1.0;
        cfg.solver.max_iters =
            js.contains("max_iters") ? as_integer(js["max_iters"], "solver.max_iters") : 2000;
        cfg.solver.tol = js.contains("tol") ? as_number(js["tol"], "solver.tol") : 0.01;
        if (!(cfg.solver.sigma0 > 0.0)) config_fail("solver.sigma0 must be positive");
    }
    if (cfg.solver.name != SolverName::none && cfg.solver.name != SolverName::classic) {
        if (cfg.solver.max_iters < 1) config_fail("solver.max_iters must be at least 1");
        if (!(cfg.solver.tol > 0.0)) config_fail("solver.tol must be positive");
    }

    if (root.contains("samples")) {
        const json& jsm = root["samples"];
        if (!jsm.is_object()) config_fail("samples must be an object");
        check_keys(jsm, "samples", {"n", "seed"});
        SamplesConfig sc;
        sc.n = as_integer(need(jsm, "samples", "n"), "samples.n");
        if (sc.n < 1) config_fail("samples.n must be at least 1");
        sc.seed = as_seed(need(jsm, "samples", "seed"), "samples.seed");
        cfg.samples = sc;
    }

    if (root.contains("paths")) {
        const json& jp = root["paths"];
        if (!jp.is_object()) config_fail("paths must be an object");
        check_keys(jp, "paths", {"frames"});
        PathsConfig pc;
        pc.frames = as_integer(need(jp, "paths", "frames"), "paths.frames");
        if (pc.frames < 2) config_fail("paths.frames must be at least 2");
        cfg.paths = pc;
    }

    if (cfg.paths && cfg.solver.name != SolverName::bfm) {
        config_fail(
            "paths requires solver 'bfm': interpolation frames assume the quadratic-cost "
            "transport map");
    }
    if (cfg.solver.name == SolverName::bfm && cfg.cost_kind != CostKind::squared_euclidean) {
        config_fail(
            "solver 'bfm' requires cost kind 'squared_euclidean' (the map formula assumes "
            "quadratic cost)");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::runtime_error& e) {
        config_fail(e.what());
    }
    return parse_config_text(text);
}

std::string config_to_json_text(const RunConfig& cfg) {
    json root;
    root["domain"] = {{"x_min", cfg.domain.x_min},
                      {"x_max", cfg.domain.x_max},
                      {"y_min", cfg.domain.y_min},
                      {"y_max", cfg.domain.y_max}};
    root["grid"] = {{"nx", cfg.domain.nx}, {"ny", cfg.domain.ny}};
    json comps = json::array();
    for (const GaussianComponent& c : cfg.mixture.components) {
        comps.push_back({{"mean", {c.mean.x, c.mean.y}},
                         {"cov_diag", {c.var.x, c.var.y}},
                         {"weight", c.weight}});
    }
    root["mixture"] = comps;
    root["classifier"] = {{"id", cfg.classifier_id}};
    root["delta"] = cfg.delta;
    json cost = {{"kind", to_string(cfg.cost_kind)}};
    if (cfg.cost_kind == CostKind::p_power) cost["p"] = cfg.cost_p;
    root["cost"] = cost;
    json solver = {{"name", to_string(cfg.solver.name)}};
    if (cfg.solver.name == SolverName::sinkhorn || cfg.solver.name == SolverName::uot) {
        solver["epsilon"] = cfg.solver.epsilon;
        solver["max_iters"] = cfg.solver.max_iters;
        solver["tol"] = cfg.solver.tol;
    }
    if (cfg.solver.name == SolverName::uot) {
        solver["lambda1"] = cfg.solver.lambda1;
        solver["lambda2"] = cfg.solver.lambda2;
    }
    if (cfg.solver.name == SolverName::bfm) {
        solver["sigma0"] = cfg.solver.sigma0;
        solver["max_iters"] = cfg.solver.max_iters;
        solver["tol"] = cfg.solver.tol;
    }
    root["solver"] = solver;
    if (cfg.samples) {
        root["samples"] = {{"n", cfg.samples->n}, {"seed", cfg.samples->seed}};
    }
    if (cfg.paths) {
        root["paths"] = {{"frames", cfg.paths->frames}};
    }
    return root.dump(2);
}

ProblemInstance build_instance(const RunConfig& cfg) {
    ProblemInstance inst;
    inst.density = discretize(cfg.mixture, cfg.domain, &inst.renorm_factor);
    const ScoreFunction f = builtin_score(cfg.classifier_id);
    inst.region = build_regions(inst.density, f, cfg.delta);
    inst.source_density = truncate(inst.density, inst.region.source_mask);
    inst.target_density = truncate(inst.density, inst.region.target_mask);

    if (cfg.samples) {
        inst.point_mode = true;
        inst.source_seed = cfg.samples->seed;
        // The target stream is seeded from the source seed through one
        // generator step, so a single config seed pins both clouds without
        // making them identical.
        inst.target_seed = SplitMix64(cfg.samples->seed).next_u64();
        const Domain dom = cfg.domain;
        const double r = inst.region.r;
        const auto in_source = [&f, dom](const Vec2& x) {
            return dom.contains(x) && score(f, x) < 0.0;
        };
        const auto in_target = [&f, dom, r](const Vec2& x) {
            const double s = score(f, x);
            return dom.contains(x) && s > 0.0 && s <= r;
        };
        DiscreteMeasure src = sample_where(cfg.mixture, cfg.samples->n, inst.source_seed, in_source);
        DiscreteMeasure tgt = sample_where(cfg.mixture, cfg.samples->n, inst.target_seed, in_target);
        inst.src_points = std::move(src.points);
        inst.src_weights = std::move(src.weights);
        inst.tgt_points = std::move(tgt.points);
        inst.tgt_weights = std::move(tgt.weights);
    } else if (cfg.solver.name != SolverName::none && cfg.solver.name != SolverName::bfm) {
        // Grid mode: the positive-mass cells of each truncated grid act as
        // weighted point clouds at the cell centers.
        for (int ix = 0; ix < cfg.domain.nx; ++ix) {
            for (int iy = 0; iy < cfg.domain.ny; ++iy) {
                const double ws = inst.source_density.at(ix, iy);
                if (ws > 0.0) {
                    inst.src_points.push_back(cfg.domain.center(ix, iy));
                    inst.src_weights.push_back(ws);
                }
                const double wt = inst.target_density.at(ix, iy);
                if (wt > 0.0) {
                    inst.tgt_points.push_back(cfg.domain.center(ix, iy));
                    inst.tgt_weights.push_back(wt);
                }
            }
        }
    }

    if (cfg.solver.name == SolverName::classic || cfg.solver.name == SolverName::sinkhorn ||
        cfg.solver.name == SolverName::uot) {
        const std::size_t nm = inst.src_points.size() * inst.tgt_points.size();
        if (nm > (std::size_t{1} << 28)) {
            config_fail("cost matrix would exceed 2^28 entries; coarsen the grid or add samples");
        }
        inst.cost = build_cost(inst.src_points, inst.tgt_points, cfg.cost_kind, cfg.cost_p);
    }
    return inst;
}

namespace {

double resolve_epsilon(double configured, const CostMatrix& C) {
    return configured > 0.0 ? configured : 0.01 * C.mean();
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// Region and instance artifacts shared by every solver, plus the derived
// scalars that describe them.
void write_region_artifacts(const RunConfig& cfg, const ProblemInstance& inst,
                            const std::string& out_dir, std::vector<std::string>& outputs,
                            json& derived) {
    const auto put_grid = [&](const std::string& name, const Grid& g) {
        write_grid_csv(join_path(out_dir, name), g);
        outputs.push_back(name);
    };
    const auto put_pgm = [&](const std::string& name, const Grid& g) {
        write_grid_pgm(join_path(out_dir, name), g);
        outputs.push_back(name);
    };
    put_grid("density.csv", inst.density);
    put_pgm("density.pgm", inst.density);
    put_grid("score.csv", score_grid(builtin_score(cfg.classifier_id), cfg.domain));
    write_mask_csv(join_path(out_dir, "source_mask.csv"), inst.region.source_mask);
    outputs.push_back("source_mask.csv");
    write_mask_csv(join_path(out_dir, "target_mask.csv"), inst.region.target_mask);
    outputs.push_back("target_mask.csv");
    put_grid("source_density.csv", inst.source_density);
    put_pgm("source_density.pgm", inst.source_density);
    put_grid("target_density.csv", inst.target_density);
    put_pgm("target_density.pgm", inst.target_density);
    if (inst.point_mode) {
        DiscreteMeasure src{inst.src_points, inst.src_weights};
        DiscreteMeasure tgt{inst.tgt_points, inst.tgt_weights};
        write_points_csv(join_path(out_dir, "source_points.csv"), src);
        outputs.push_back("source_points.csv");
        write_points_csv(join_path(out_dir, "target_points.csv"), tgt);
        outputs.push_back("target_points.csv");
    }

    derived["renorm_factor"] = inst.renorm_factor;
    derived["threshold_r"] = inst.region.r;
    derived["achieved_prob"] = inst.region.achieved_prob;
    derived["source_cells"] = inst.region.source_mask.count();
    derived["target_cells"] = inst.region.target_mask.count();
    if (inst.point_mode) {
        derived["source_seed"] = inst.source_seed;
        derived["target_seed"] = inst.target_seed;
    }
}

void write_recommendations_csv(const std::string& path, const TransportPlan& plan,
                               std::vector<std::string>& outputs, const std::string& name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "source_id,target_id\n";
    for (int i = 0; i < plan.n; ++i) {
        double row_mass = 0.0;
        for (int j = 0; j < plan.m; ++j) {
            row_mass += plan.matrix[static_cast<std::size_t>(i) * plan.m + j];
        }
        if (row_mass <= 0.0) continue;  // unserved source rows are omitted
        out << i << ',' << recommend(plan, i) << '\n';
    }
    outputs.push_back(name);
}

void fill_plan_metrics(json& derived, const TransportPlan& plan, const BaselineResult& base,
                       const ProblemInstance& inst) {
    derived["total_cost"] = plan.total_cost;
    derived["plan_mass"] = plan.mass;
    derived["iterations"] = plan.iterations_used;
    derived["residual"] = plan.residual;
    derived["converged"] = plan.converged;
    derived["baseline_mean_cost"] = base.mean_cost;
    if (base.mean_cost > 0.0 && plan.mass > 0.0) {
        // Cost per unit of transported mass, so balanced and unbalanced
        // plans compare against the same per-individual baseline.
        derived["extra_cost_percent"] =
            extra_cost_percent(plan.total_cost / plan.mass, base.mean_cost);
    }
    derived["kl_target"] = kl_divergence(plan.tgt_marginal, inst.tgt_weights);
}

// Mass-weighted fraction of source cells whose mapped point lands in the
// target mask.
double target_mass_fraction(const GridDensity& src, const GridMap& map, const Mask& target) {
    const Domain& dom = src.dom;
    double inside = 0.0, total = 0.0;
    for (int i = 0; i < dom.nx; ++i) {
        for (int j = 0; j < dom.ny; ++j) {
            const double mass = src.at(i, j);
            if (mass <= 0.0) continue;
            total += mass;
            int tx = static_cast<int>((map.x.at(i, j) - dom.x_min) / dom.dx());
            int ty = static_cast<int>((map.y.at(i, j) - dom.y_min) / dom.dy());
            tx = std::min(std::max(tx, 0), dom.nx - 1);
            ty = std::min(std::max(ty, 0), dom.ny - 1);
            if (target.at(tx, ty)) inside += mass;
        }
    }
    return total > 0.0 ? inside / total : 0.0;
}

std::string frame_name(int index, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%02d.%s", index, ext);
    return std::string(buf);
}

void write_manifest_and_timings(const std::string& out_dir, const std::string& command,
                                const std::string& figure_id, const RunConfig& cfg,
                                const json& derived, const json& extra,
                                std::vector<std::string>& outputs, json& timings) {
    json manifest;
    manifest["tool"] = "ccot";
    manifest["version"] = kVersion;
    manifest["format_version"] = kFormatVersion;
    manifest["command"] = command;
    if (!figure_id.empty()) manifest["figure"] = figure_id;
    manifest["config"] = json::parse(config_to_json_text(cfg));
    manifest["derived"] = derived;
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    manifest["outputs"] = outputs;
    manifest["timings_file"] = "timings.json";
    write_text_file(join_path(out_dir, "manifest.json"), manifest.dump(2) + "\n");
    outputs.push_back("manifest.json");
    write_text_file(join_path(out_dir, "timings.json"), timings.dump(2) + "\n");
    outputs.push_back("timings.json");
}

}  // namespace

RunResult run_experiment(const RunConfig& cfg, const std::string& out_dir,
                         const std::string& command, const std::string& figure_id, bool quiet) {
    const auto t_start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    RunResult result;
    result.out_dir = out_dir;
    std::vector<std::string> outputs;
    json timings;
    json derived;

    auto t0 = std::chrono::steady_clock::now();
    const ProblemInstance inst = build_instance(cfg);
    timings["instance_seconds"] = seconds_since(t0);

    if (!quiet) {
        std::cout << "[ccot] regions: r=" << format_double(inst.region.r)
                  << " achieved_prob=" << format_double(inst.region.achieved_prob) << "\n";
    }

    t0 = std::chrono::steady_clock::now();
    write_region_artifacts(cfg, inst, out_dir, outputs, derived);
    timings["artifacts_seconds"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    switch (cfg.solver.name) {
        case SolverName::none:
            break;
        case SolverName::classic: {
            const BaselineResult base = classic_ce(inst.cost);
            write_baseline_csv(join_path(out_dir, "baseline.csv"), base);
            outputs.push_back("baseline.csv");
            derived["baseline_mean_cost"] = base.mean_cost;
            if (!quiet) {
                std::cout << "[ccot] classic: mean cost " << format_double(base.mean_cost) << "\n";
            }
            break;
        }
        case SolverName::sinkhorn: {
            SinkhornParams sp;
            sp.epsilon = resolve_epsilon(cfg.solver.epsilon, inst.cost);
            sp.max_iters = cfg.solver.max_iters;
            sp.tolerance = cfg.solver.tol;
            const TransportPlan plan = sinkhorn(inst.src_weights, inst.tgt_weights, inst.cost, sp);
            const BaselineResult base = classic_ce(inst.cost);
            write_baseline_csv(join_path(out_dir, "baseline.csv"), base);
            outputs.push_back("baseline.csv");
            write_plan_csv(join_path(out_dir, "plan.csv"), plan);
            outputs.push_back("plan.csv");
            write_recommendations_csv(join_path(out_dir, "recommendations.csv"), plan, outputs,
                                      "recommendations.csv");
            derived["epsilon_resolved"] = sp.epsilon;
            fill_plan_metrics(derived, plan, base, inst);
            if (!quiet) {
                std::cout << "[ccot] sinkhorn: cost " << format_double(plan.total_cost) << " in "
                          << plan.iterations_used << " iterations\n";
            }
            break;
        }
        case SolverName::uot: {
            UnbalancedParams up;
            up.epsilon = resolve_epsilon(cfg.solver.epsilon, inst.cost);
            up.lambda1 = cfg.solver.lambda1;
            up.lambda2 = cfg.solver.lambda2;
            up.max_iters = cfg.solver.max_iters;
            up.tolerance = cfg.solver.tol;
            const TransportPlan plan =
                unbalanced_sinkhorn(inst.src_weights, inst.tgt_weights, inst.cost, up);
            const BaselineResult base = classic_ce(inst.cost);
            write_baseline_csv(join_path(out_dir, "baseline.csv"), base);
            outputs.push_back("baseline.csv");
            write_plan_csv(join_path(out_dir, "plan.csv"), plan);
            outputs.push_back("plan.csv");
            write_recommendations_csv(join_path(out_dir, "recommendations.csv"), plan, outputs,
                                      "recommendations.csv");
            derived["epsilon_resolved"] = up.epsilon;
            fill_plan_metrics(derived, plan, base, inst);
            if (!quiet) {
                std::cout << "[ccot] uot(lambda2=" << format_double(up.lambda2) << "): cost "
                          << format_double(plan.total_cost) << " mass "
                          << format_double(plan.mass) << "\n";
            }
            break;
        }
        case SolverName::bfm: {
            BfmParams bp;
            bp.sigma0 = cfg.solver.sigma0;
            bp.max_iters = cfg.solver.max_iters;
            bp.tol = cfg.solver.tol;
            const BfmResult res = back_and_forth(inst.source_density, inst.target_density, bp);
            write_grid_csv(join_path(out_dir, "map_x.csv"), res.map.x);
            outputs.push_back("map_x.csv");
            write_grid_csv(join_path(out_dir, "map_y.csv"), res.map.y);
            outputs.push_back("map_y.csv");
            write_grid_csv(join_path(out_dir, "pushforward.csv"), res.pushforward);
            outputs.push_back("pushforward.csv");
            write_grid_pgm(join_path(out_dir, "pushforward.pgm"), res.pushforward);
            outputs.push_back("pushforward.pgm");
            derived["dual_value"] = res.dual_value;
            derived["halfsq_cost"] = res.primal_halfsq_cost;
            derived["residual_l1"] = res.residual_l1;
            derived["iterations"] = res.iterations_used;
            derived["sigma_final"] = res.sigma_final;
            derived["converged"] = res.converged;
            derived["target_mass_fraction"] =
                target_mass_fraction(inst.source_density, res.map, inst.region.target_mask);
            if (!quiet) {
                std::cout << "[ccot] bfm: residual " << format_double(res.residual_l1) << " after "
                          << res.iterations_used << " iterations\n";
            }
            if (cfg.paths) {
                const PathFrames frames = make_frames(inst.source_density, res.map,
                                                      cfg.paths->frames);
                for (std::size_t j = 0; j < frames.frames.size(); ++j) {
                    const std::string csv = frame_name(static_cast<int>(j), "csv");
                    write_grid_csv(join_path(out_dir, csv), frames.frames[j]);
                    outputs.push_back(csv);
                    const std::string pgm = frame_name(static_cast<int>(j), "pgm");
                    write_grid_pgm(join_path(out_dir, pgm), frames.frames[j]);
                    outputs.push_back(pgm);
                }
                if (inst.point_mode) {
                    TrajectoryTable table;
                    table.times = frames.times;
                    for (const Vec2& x : inst.src_points) {
                        table.points.push_back(trajectory(x, res.map, cfg.paths->frames));
                    }
                    write_trajectories_csv(join_path(out_dir, "trajectories.csv"), table);
                    outputs.push_back("trajectories.csv");
                }
            }
            break;
        }
    }
    timings["solve_seconds"] = seconds_since(t0);
    timings["total_seconds"] = seconds_since(t_start);

    write_manifest_and_timings(out_dir, command, figure_id, cfg, derived, json::object(), outputs,
                               timings);
    if (!quiet) {
        std::cout << "[ccot] wrote " << outputs.size() << " files to " << out_dir << "\n";
    }
    result.outputs = std::move(outputs);
    return result;
}

RunResult sweep_lambda2(const RunConfig& cfg, const std::vector<double>& values,
                        const std::string& out_dir, const std::string& figure_id, bool quiet) {
    if (cfg.solver.name != SolverName::uot) {
        config_fail("sweep requires solver 'uot' (lambda2 is its relaxation weight)");
    }
    if (values.empty()) config_fail("sweep needs at least one lambda2 value");
    for (double v : values) {
        if (v < 0.0) config_fail("lambda2 values must be nonnegative");
    }

    const auto t_start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    RunResult result;
    result.out_dir = out_dir;
    std::vector<std::string> outputs;
    json timings;
    json derived;

    auto t0 = std::chrono::steady_clock::now();
    const ProblemInstance inst = build_instance(cfg);
    timings["instance_seconds"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    write_region_artifacts(cfg, inst, out_dir, outputs, derived);
    timings["artifacts_seconds"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const BaselineResult base = classic_ce(inst.cost);
    write_baseline_csv(join_path(out_dir, "baseline.csv"), base);
    outputs.push_back("baseline.csv");
    const double eps = resolve_epsilon(cfg.solver.epsilon, inst.cost);
    derived["epsilon_resolved"] = eps;
    derived["baseline_mean_cost"] = base.mean_cost;

    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double lambda2 : values) {
        UnbalancedParams up;
        up.epsilon = eps;
        up.lambda1 = cfg.solver.lambda1;
        up.lambda2 = lambda2;
        up.max_iters = cfg.solver.max_iters;
        up.tolerance = cfg.solver.tol;
        const TransportPlan plan =
            unbalanced_sinkhorn(inst.src_weights, inst.tgt_weights, inst.cost, up);
        SweepRow row;
        row.lambda2 = lambda2;
        row.total_cost = plan.total_cost;
        row.extra_cost_pct = extra_cost_percent(plan.total_cost / plan.mass, base.mean_cost);
        row.kl = kl_divergence(plan.tgt_marginal, inst.tgt_weights);
        row.log10_kl = std::log10(std::max(row.kl, 1e-300));
        rows.push_back(row);
        if (!quiet) {
            std::cout << "[ccot] lambda2=" << format_double(lambda2) << ": extra_cost_pct "
                      << format_double(row.extra_cost_pct) << " kl " << format_double(row.kl)
                      << "\n";
        }
    }
    write_sweep_csv(join_path(out_dir, "sweep.csv"), rows);
    outputs.push_back("sweep.csv");
    timings["solve_seconds"] = seconds_since(t0);
    timings["total_seconds"] = seconds_since(t_start);

    json extra;
    extra["sweep_values"] = values;
    write_manifest_and_timings(out_dir, "sweep", figure_id, cfg, derived, extra, outputs, timings);
    if (!quiet) {
        std::cout << "[ccot] wrote " << outputs.size() << " files to " << out_dir << "\n";
    }
    result.outputs = std::move(outputs);
    return result;
}

namespace {

RunConfig preset_base() {
    RunConfig cfg;
    cfg.domain = Domain{0.0, 1.0, 0.0, 1.0, 64, 64};
    cfg.mixture.components = {
        {{0.3, 0.3}, {0.2, 0.2}, 0.5},
        {{0.7, 0.7}, {0.2, 0.2}, 0.5},
    };
    cfg.classifier_id = "f1";
    cfg.delta = 0.2;
    cfg.cost_kind = CostKind::squared_euclidean;
    return cfg;
}

SolverConfig entropic_solver(SolverName name, double lambda2 = 1.0) {
    SolverConfig s;
    s.name = name;
    s.epsilon = 0.0;  // resolved to 0.01 * mean(C) at run time
    s.lambda1 = 1.0;
    s.lambda2 = lambda2;
    s.max_iters = 10000;
    s.tol = 1e-9;
    return s;
}

}  // namespace

std::vector<PresetStage> preset_stages(const std::string& figure_id) {
    if (figure_id == "fig4") {
        RunConfig cfg = preset_base();
        cfg.solver.name = SolverName::none;
        return {{"regions", cfg, {}}};
    }
    if (figure_id == "fig5") {
        RunConfig base = preset_base();
        base.cost_kind = CostKind::euclidean;
        base.samples = SamplesConfig{100, 17};
        std::vector<PresetStage> stages;
        RunConfig classic = base;
        classic.solver.name = SolverName::classic;
        stages.push_back({"classic", classic, {}});
        RunConfig balanced = base;
        balanced.solver = entropic_solver(SolverName::sinkhorn);
        stages.push_back({"sinkhorn", balanced, {}});
        const std::pair<const char*, double> relaxations[] = {
            {"uot_lambda2_0", 0.0}, {"uot_lambda2_05", 0.5}, {"uot_lambda2_1", 1.0}};
        for (const auto& [dir, lambda2] : relaxations) {
            RunConfig uot = base;
            uot.solver = entropic_solver(SolverName::uot, lambda2);
            stages.push_back({dir, uot, {}});
        }
        return stages;
    }
    if (figure_id == "fig6") {
        RunConfig cfg = preset_base();
        cfg.cost_kind = CostKind::euclidean;
        cfg.samples = SamplesConfig{100, 17};
        cfg.solver = entropic_solver(SolverName::uot);
        std::vector<double> values;
        for (int i = 0; i <= 10; ++i) values.push_back(i / 10.0);
        return {{"sweep", cfg, values}};
    }
    if (figure_id == "fig7") {
        RunConfig cfg = preset_base();
        cfg.classifier_id = "f3";
        cfg.solver.name = SolverName::none;
        return {{"regions", cfg, {}}};
    }
    if (figure_id == "fig8") {
        RunConfig cfg = preset_base();
        cfg.solver.name = SolverName::bfm;
        cfg.solver.sigma0 = 1.0;
        cfg.solver.max_iters = 2000;
        cfg.solver.tol = 0.04;
        cfg.paths = PathsConfig{5};
        cfg.samples = SamplesConfig{100, 17};
        return {{"flow", cfg, {}}};
    }
    throw ConfigError("unknown figure id '" + figure_id + "' (expected fig4, fig5, fig6, fig7, or fig8)");
}

RunResult reproduce(const std::string& figure_id, const std::string& out_dir, bool quiet,
                    std::optional<std::uint64_t> seed_override) {
    std::vector<PresetStage> stages = preset_stages(figure_id);
    fs::create_directories(out_dir);
    RunResult result;
    result.out_dir = out_dir;
    json stage_list = json::array();
    for (PresetStage& st : stages) {
        if (seed_override && st.config.samples) st.config.samples->seed = *seed_override;
        const std::string sub = join_path(out_dir, st.dir);
        if (!quiet) std::cout << "[ccot] " << figure_id << " stage " << st.dir << "\n";
        const RunResult r = st.sweep_values.empty()
                                ? run_experiment(st.config, sub, "reproduce", figure_id, quiet)
                                : sweep_lambda2(st.config, st.sweep_values, sub, figure_id, quiet);
        for (const std::string& name : r.outputs) result.outputs.push_back(st.dir + "/" + name);
        stage_list.push_back({{"dir", st.dir}, {"solver", to_string(st.config.solver.name)}});
    }
    json manifest;
    manifest["tool"] = "ccot";
    manifest["version"] = kVersion;
    manifest["format_version"] = kFormatVersion;
    manifest["command"] = "reproduce";
    manifest["figure"] = figure_id;
    manifest["stages"] = stage_list;
    write_text_file(join_path(out_dir, "manifest.json"), manifest.dump(2) + "\n");
    result.outputs.push_back("manifest.json");
    return result;
}

}  // namespace ccot
