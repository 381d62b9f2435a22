#pragma once
#include <vector>

#include "ctm/errors.hpp"

namespace ctm {

// Uniform 2D rectangular grid, periodic in x, solid walls in y.
// Cell (i, j) is centered at (x0 + (i+1/2) dx, y0 + (j+1/2) dy).
struct Grid {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double dy = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;

    Grid() = default;
    Grid(int nx_, int ny_, double dx_, double dy_, double x0_ = 0.0, double y0_ = 0.0);

    int ncells() const { return nx * ny; }
    double lx() const { return nx * dx; }
    double ly() const { return ny * dy; }
    double cell_area() const { return dx * dy; }
    double cell_center_x(int i) const { return x0 + (i + 0.5) * dx; }
    double cell_center_y(int j) const { return y0 + (j + 0.5) * dy; }
    int idx(int i, int j) const { return j * nx + i; }

    bool operator==(const Grid& o) const {
        return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy && x0 == o.x0 && y0 == o.y0;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Cell-averaged scalar field, row-major from the south row: values[j*nx + i].
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(static_cast<size_t>(g.ncells()), fill) {}

    double& at(int i, int j) { return values[static_cast<size_t>(grid.idx(i, j))]; }
    double at(int i, int j) const { return values[static_cast<size_t>(grid.idx(i, j))]; }

    bool all_finite() const;
    double min_value() const;
    double max_value() const;
};

// Rectangular instantaneous release: uniform excess over a constant background.
struct PlumeSpec {
    double center_x = 0.0;
    double center_y = 0.0;
    double side_x = 0.0;
    double side_y = 0.0;
    double background = 1.0;
    double excess_factor = 2.0;
};

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what);

// Rasterizes the plume rectangle by cell-center containment (all-or-nothing).
ScalarField make_plume(const Grid& grid, const PlumeSpec& spec);

// Boolean footprint of the plume rectangle (1 inside, 0 outside), same rule
// as make_plume.
std::vector<unsigned char> plume_footprint(const Grid& grid, const PlumeSpec& spec);

// L2 inner product sum(a_ij * b_ij) * dx * dy with a fixed south-to-north,
// west-to-east traversal; repeated evaluation is bit-identical.
double inner_product(const ScalarField& a, const ScalarField& b);

double norm_l2(const ScalarField& a);

// Plain integral sum(c_ij) * dx * dy (the quantity advection conserves).
double field_integral(const ScalarField& c);

// Excess mass above a constant background: sum(max(c_ij - background, 0)) * dx * dy.
double total_mass(const ScalarField& c, double background);

// 100 * ||estimate - truth|| / ||truth - background||, norms from inner_product.
double rel_l2_error(const ScalarField& estimate, const ScalarField& truth, double background);

}  // namespace ctm
