#include "ccot/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ccot {

std::string format_double(double x) {
    // 15 significant digits suffice for most values; escalate only until the
    // text parses back to the exact same double, so output stays short
    // without ever losing precision.
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return std::string(buf);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

void write_domain_header(std::ofstream& out, const Domain& dom) {
    out << "nx,ny,x_min,x_max,y_min,y_max\n";
    out << dom.nx << ',' << dom.ny << ',' << format_double(dom.x_min) << ','
        << format_double(dom.x_max) << ',' << format_double(dom.y_min) << ','
        << format_double(dom.y_max) << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

void write_grid_csv(const std::string& path, const Grid& grid) {
    std::ofstream out = open_out(path);
    write_domain_header(out, grid.dom);
    for (int ix = 0; ix < grid.dom.nx; ++ix) {
        for (int iy = 0; iy < grid.dom.ny; ++iy) {
            if (iy > 0) out << ',';
            out << format_double(grid.at(ix, iy));
        }
        out << '\n';
    }
}

Grid read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("grid csv truncated: " + path);
    if (!std::getline(in, line)) throw std::runtime_error("grid csv truncated: " + path);
    const std::vector<std::string> head = split_csv(line);
    if (head.size() != 6) throw std::runtime_error("grid csv has a malformed header: " + path);
    Domain dom;
    dom.nx = std::stoi(head[0]);
    dom.ny = std::stoi(head[1]);
    dom.x_min = std::stod(head[2]);
    dom.x_max = std::stod(head[3]);
    dom.y_min = std::stod(head[4]);
    dom.y_max = std::stod(head[5]);
    dom.validate();
    Grid grid(dom);
    for (int ix = 0; ix < dom.nx; ++ix) {
        if (!std::getline(in, line)) throw std::runtime_error("grid csv truncated: " + path);
        const std::vector<std::string> row = split_csv(line);
        if (row.size() != static_cast<std::size_t>(dom.ny)) {
            throw std::runtime_error("grid csv row has wrong width: " + path);
        }
        for (int iy = 0; iy < dom.ny; ++iy) {
            grid.at(ix, iy) = std::stod(row[static_cast<std::size_t>(iy)]);
        }
    }
    return grid;
}

void write_mask_csv(const std::string& path, const Mask& mask) {
    std::ofstream out = open_out(path);
    write_domain_header(out, mask.dom);
    for (int ix = 0; ix < mask.dom.nx; ++ix) {
        for (int iy = 0; iy < mask.dom.ny; ++iy) {
            if (iy > 0) out << ',';
            out << (mask.at(ix, iy) ? '1' : '0');
        }
        out << '\n';
    }
}

void write_points_csv(const std::string& path, const DiscreteMeasure& m) {
    std::ofstream out = open_out(path);
    out << "x,y,w\n";
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        out << format_double(m.points[i].x) << ',' << format_double(m.points[i].y) << ','
            << format_double(m.weights[i]) << '\n';
    }
}

void write_plan_csv(const std::string& path, const TransportPlan& plan) {
    std::ofstream out = open_out(path);
    out << "i,j,mass\n";
    for (int i = 0; i < plan.n; ++i) {
        for (int j = 0; j < plan.m; ++j) {
            const double mass = plan.matrix[static_cast<std::size_t>(i) * plan.m + j];
            if (mass <= 1e-12) continue;
            out << i << ',' << j << ',' << format_double(mass) << '\n';
        }
    }
}

void write_baseline_csv(const std::string& path, const BaselineResult& result) {
    std::ofstream out = open_out(path);
    out << "source_id,target_id,cost\n";
    for (std::size_t i = 0; i < result.match.size(); ++i) {
        out << i << ',' << result.match[i] << ',' << format_double(result.cost_per_source[i])
            << '\n';
    }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out = open_out(path);
    out << "lambda2,total_cost,extra_cost_pct,kl,log10_kl\n";
    for (const SweepRow& r : rows) {
        out << format_double(r.lambda2) << ',' << format_double(r.total_cost) << ','
            << format_double(r.extra_cost_pct) << ',' << format_double(r.kl) << ','
            << format_double(r.log10_kl) << '\n';
    }
}

void write_trajectories_csv(const std::string& path, const TrajectoryTable& table) {
    std::ofstream out = open_out(path);
    out << "point_id,t,x,y\n";
    for (std::size_t id = 0; id < table.points.size(); ++id) {
        const std::vector<Vec2>& traj = table.points[id];
        if (traj.size() != table.times.size()) {
            throw std::runtime_error("trajectory length does not match the time grid");
        }
        for (std::size_t f = 0; f < traj.size(); ++f) {
            out << id << ',' << format_double(table.times[f]) << ',' << format_double(traj[f].x)
                << ',' << format_double(traj[f].y) << '\n';
        }
    }
}

void write_grid_pgm(const std::string& path, const Grid& grid) {
    std::ofstream out = open_out(path);
    double peak = 0.0;
    for (double v : grid.v) peak = std::max(peak, v);
    out << "P2\n" << grid.dom.nx << ' ' << grid.dom.ny << "\n255\n";
    // Image rows run top to bottom, so emit iy = ny-1 first; pixel columns
    // follow ix.
    for (int iy = grid.dom.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < grid.dom.nx; ++ix) {
            if (ix > 0) out << ' ';
            int level = 0;
            if (peak > 0.0) {
                level = static_cast<int>(std::lround(255.0 * std::max(grid.at(ix, iy), 0.0) / peak));
                if (level > 255) level = 255;
            }
            out << level;
        }
        out << '\n';
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ccot
