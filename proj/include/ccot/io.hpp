#pragma once

#include <string>
#include <vector>

#include "ccot/baseline.hpp"
#include "ccot/measures.hpp"
#include "ccot/sinkhorn.hpp"

namespace ccot {

// All writers emit deterministic text: doubles are printed in the shortest
// decimal form that survives a write/read round trip bit-exactly, and row
// order is fixed by the data layout.  Writers throw std::runtime_error when
// the file cannot be opened.

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

// Layout: header naming the domain fields, one line with their values, then
// nx rows of ny comma-separated cell values (row ix, column iy).
void write_grid_csv(const std::string& path, const Grid& grid);
Grid read_grid_csv(const std::string& path);

// Same layout as grids with 0/1 entries.
void write_mask_csv(const std::string& path, const Mask& mask);

// Header x,y,w; one row per point.
void write_points_csv(const std::string& path, const DiscreteMeasure& m);

// Header i,j,mass; entries below 1e-12 are omitted to keep files sparse.
void write_plan_csv(const std::string& path, const TransportPlan& plan);

// Header source_id,target_id,cost.
void write_baseline_csv(const std::string& path, const BaselineResult& result);

// Header lambda2,total_cost,extra_cost_pct,kl,log10_kl.
struct SweepRow {
    double lambda2 = 0.0;
    double total_cost = 0.0;
    double extra_cost_pct = 0.0;
    double kl = 0.0;
    double log10_kl = 0.0;
};
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// Header point_id,t,x,y; one row per (point, time) pair, points outer.
struct TrajectoryTable {
    std::vector<double> times;
    std::vector<std::vector<Vec2>> points;  // points[id][frame]
};
void write_trajectories_csv(const std::string& path, const TrajectoryTable& table);

// Plain-text PGM heatmap, max-normalized to 255; row order puts y_max at
// the top so the image matches the usual plot orientation.
void write_grid_pgm(const std::string& path, const Grid& grid);

// Whole-file helpers used for manifests and config round trips.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ccot
