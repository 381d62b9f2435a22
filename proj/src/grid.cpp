#include "ctm/grid.hpp"

#include <cmath>
#include <string>

namespace ctm {

Grid::Grid(int nx_, int ny_, double dx_, double dy_, double x0_, double y0_)
    : nx(nx_), ny(ny_), dx(dx_), dy(dy_), x0(x0_), y0(y0_) {
    if (nx < 4 || ny < 4)
        throw ConfigError("grid: nx and ny must be >= 4 (got nx=" + std::to_string(nx) +
                          ", ny=" + std::to_string(ny) + ")");
    if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("grid: dx and dy must be > 0");
}

bool ScalarField::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

double ScalarField::min_value() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::min(m, v);
    return m;
}

double ScalarField::max_value() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::max(m, v);
    return m;
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
    if (a.grid != b.grid) throw ShapeError(std::string(what) + ": fields live on different grids");
}

static void validate_plume(const Grid& grid, const PlumeSpec& spec) {
    if (!(spec.excess_factor > 1.0))
        throw ConfigError("plume: excess_factor must be > 1");
    if (!(spec.side_x > 0.0) || !(spec.side_y > 0.0))
        throw ConfigError("plume: side_x and side_y must be > 0");
    if (spec.side_x < 2.0 * grid.dx || spec.side_y < 2.0 * grid.dy)
        throw ConfigError("plume: rectangle must span at least 2 cells in each direction");
    const double xl = spec.center_x - 0.5 * spec.side_x;
    const double xr = spec.center_x + 0.5 * spec.side_x;
    const double yl = spec.center_y - 0.5 * spec.side_y;
    const double yr = spec.center_y + 0.5 * spec.side_y;
    if (xl < grid.x0 || xr > grid.x0 + grid.lx() || yl < grid.y0 || yr > grid.y0 + grid.ly())
        throw ConfigError("plume: rectangle extends outside the domain");
}

std::vector<unsigned char> plume_footprint(const Grid& grid, const PlumeSpec& spec) {
    validate_plume(grid, spec);
    const double xl = spec.center_x - 0.5 * spec.side_x;
    const double xr = spec.center_x + 0.5 * spec.side_x;
    const double yl = spec.center_y - 0.5 * spec.side_y;
    const double yr = spec.center_y + 0.5 * spec.side_y;
    // half-open containment: when a rectangle edge sits exactly on a row or
    // column of centers (common for cell-aligned releases) only the west and
    // south edge cells count, so a 3-cell-wide release covers 3 cells, not 4
    std::vector<unsigned char> mask(static_cast<size_t>(grid.ncells()), 0);
    for (int j = 0; j < grid.ny; ++j) {
        const double yc = grid.cell_center_y(j);
        if (yc < yl || yc >= yr) continue;
        for (int i = 0; i < grid.nx; ++i) {
            const double xc = grid.cell_center_x(i);
            if (xc >= xl && xc < xr) mask[static_cast<size_t>(grid.idx(i, j))] = 1;
        }
    }
    return mask;
}

ScalarField make_plume(const Grid& grid, const PlumeSpec& spec) {
    const auto mask = plume_footprint(grid, spec);
    ScalarField c(grid, spec.background);
    const double excess = spec.background * spec.excess_factor;
    for (int k = 0; k < grid.ncells(); ++k)
        if (mask[static_cast<size_t>(k)]) c.values[static_cast<size_t>(k)] = excess;
    return c;
}

double inner_product(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "inner_product");
    double s = 0.0;
    const int n = a.grid.ncells();
    for (int k = 0; k < n; ++k) s += a.values[static_cast<size_t>(k)] * b.values[static_cast<size_t>(k)];
    return s * a.grid.dx * a.grid.dy;
}

double norm_l2(const ScalarField& a) { return std::sqrt(inner_product(a, a)); }

double field_integral(const ScalarField& c) {
    double s = 0.0;
    for (double v : c.values) s += v;
    return s * c.grid.dx * c.grid.dy;
}

double total_mass(const ScalarField& c, double background) {
    double s = 0.0;
    for (double v : c.values) s += std::max(v - background, 0.0);
    return s * c.grid.dx * c.grid.dy;
}

double rel_l2_error(const ScalarField& estimate, const ScalarField& truth, double background) {
    require_same_grid(estimate, truth, "rel_l2_error");
    double num = 0.0, den = 0.0;
    const int n = truth.grid.ncells();
    for (int k = 0; k < n; ++k) {
        const double d = estimate.values[static_cast<size_t>(k)] - truth.values[static_cast<size_t>(k)];
        const double e = truth.values[static_cast<size_t>(k)] - background;
        num += d * d;
        den += e * e;
    }
    if (den == 0.0)
        throw PreconditionError("rel_l2_error: truth equals the background everywhere (degenerate reference)");
    return 100.0 * std::sqrt(num / den);
}

}  // namespace ctm
