#include "kalinv/errors.hpp"
#include "kalinv/problems/lorenz.hpp"
#include "kalinv/runner.hpp"

#include <fstream>
#include <iomanip>

namespace kalinv::runner {

std::vector<LandscapeRow> compute_landscape(const LandscapeOptions& o) {
    if (o.problem != "lorenz63:one_param") throw ConfigError("--problem", "landscape supports lorenz63:one_param");
    if (!(o.r_max > o.r_min)) throw ConfigError("--r-max", "must exceed --r-min");
    if (o.points < 2) throw ConfigError("--points", "must be at least 2");
    if (!(o.sigma_r > 0.0)) throw ConfigError("--sigma-r", "must be positive");
    if (o.quad_order < 8) throw ConfigError("--quad-order", "must be at least 8");
    if (!(o.fd_step > 0.0)) throw ConfigError("--fd-step", "must be positive");

    problems::Lorenz63Options lo;
    lo.seed = o.seed;
    const auto g = problems::lorenz63_x3_average(lo);

    std::vector<double> grid(static_cast<std::size_t>(o.points));
    for (int i = 0; i < o.points; ++i) grid[static_cast<std::size_t>(i)] = o.r_min + (o.r_max - o.r_min) * i / (o.points - 1);
    const std::vector<LandscapePoint> smooth = averaged_landscape_1d(g, grid, o.sigma_r, o.quad_order);

    std::vector<LandscapeRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        LandscapeRow row;
        row.r = grid[i];
        row.value = g(grid[i]);
        row.averaged_value = smooth[i].averaged_value;
        row.averaged_gradient = smooth[i].averaged_gradient;
        row.fd_gradient = (g(grid[i] + o.fd_step) - g(grid[i] - o.fd_step)) / (2.0 * o.fd_step);
        rows.push_back(row);
    }
    return rows;
}

void write_landscape_csv(const std::filesystem::path& path, const std::vector<LandscapeRow>& rows) {
    std::ofstream f(path);
    if (!f) throw ConfigError("--out", "cannot open " + path.string() + " for writing");
    f << "r,G,FG,FdG,dG_fd\n" << std::setprecision(17);
    for (const LandscapeRow& r : rows) {
        f << r.r << ',' << r.value << ',' << r.averaged_value << ',' << r.averaged_gradient << ',' << r.fd_gradient
          << '\n';
    }
    if (!f) throw ConfigError("--out", "write to " + path.string() + " failed");
}

}  // namespace kalinv::runner
