#include "ctm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ctm/adjoint.hpp"
#include "ctm/errors.hpp"

namespace ctm {

InfluenceRegion area_of_influence(const ScalarField& obs, const WindField& w, double window,
                                  const SchemeSpec& scheme, const PlumeSpec& plume, double t0,
                                  const DiffusionSpec& diffusion) {
    if (window < 0.0) throw PreconditionError("area_of_influence: window must be >= 0");
    AdjointSpec adj;
    adj.variant = AdjointVariant::continuous;
    ScalarField back = integrate_adjoint(obs, w, t0, t0 + window, scheme, diffusion, adj);

    InfluenceRegion region;
    region.threshold = plume.background * (plume.excess_factor - 1.0) / 100.0;
    region.mask.assign(back.values.size(), 0);
    int count = 0;
    for (size_t k = 0; k < back.values.size(); ++k) {
        if (back.values[k] - plume.background > region.threshold) {
            region.mask[k] = 1;
            ++count;
        }
    }
    region.area = count * obs.grid.cell_area();
    return region;
}

double broadening_estimate(const PlumeSpec& plume, double d_h, double t) {
    if (d_h < 0.0 || t < 0.0) throw PreconditionError("broadening_estimate: d_h and t must be >= 0");
    if (plume.side_x <= 0.0 || plume.side_y <= 0.0)
        throw PreconditionError("broadening_estimate: plume sides must be positive");
    const double r = std::sqrt(d_h * t);
    return (plume.side_x + 2.0 * r) * (plume.side_y + 2.0 * r) / (plume.side_x * plume.side_y);
}

LossEstimate loss_estimate(double area_true, double area_influence) {
    if (area_true <= 0.0) throw PreconditionError("loss_estimate: true area must be positive");
    if (area_influence < area_true) return {0.0, true};
    return {100.0 * (1.0 - area_true / area_influence), false};
}

namespace {

struct Center {
    double angle_x;  // position along x expressed on the periodic circle
    double y;
};

Center excess_center(const ScalarField& c, double background, const char* what) {
    const Grid& g = c.grid;
    double mass = 0.0, sx = 0.0, cx = 0.0, my = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double m = std::max(c.at(i, j) - background, 0.0);
            if (m == 0.0) continue;
            const double theta = 2.0 * M_PI * (static_cast<double>(i) + 0.5) / g.nx;
            mass += m;
            sx += m * std::sin(theta);
            cx += m * std::cos(theta);
            my += m * (g.y0 + (j + 0.5) * g.dy);
        }
    }
    if (mass <= 0.0)
        throw PreconditionError(std::string(what) + ": no positive excess, center undefined");
    return {std::atan2(sx, cx), my / mass};
}

}  // namespace

double center_of_mass_error(const ScalarField& estimate, const ScalarField& truth,
                            double background, double r_max) {
    require_same_grid(estimate, truth, "center_of_mass_error");
    if (r_max <= 0.0) throw PreconditionError("center_of_mass_error: r_max must be positive");
    const Center ct = excess_center(truth, background, "center_of_mass_error: truth");
    const Center ce = excess_center(estimate, background, "center_of_mass_error: estimate");
    double dtheta = ce.angle_x - ct.angle_x;
    dtheta = std::remainder(dtheta, 2.0 * M_PI);
    const double dx = dtheta * truth.grid.lx() / (2.0 * M_PI);
    const double dy = ce.y - ct.y;
    return 100.0 * std::hypot(dx, dy) / r_max;
}

double total_mass_error(const ScalarField& estimate, const ScalarField& truth, double background) {
    require_same_grid(estimate, truth, "total_mass_error");
    const double mt = total_mass(truth, background);
    if (mt <= 0.0) throw PreconditionError("total_mass_error: truth excess mass must be positive");
    return 100.0 * (total_mass(estimate, background) - mt) / mt;
}

namespace {

// Bilinear samples of the staggered wind at an arbitrary point: periodic in
// x, clamped to the outermost rows/faces in y (walls carry v = 0 anyway).
double sample_u(const FaceVelocities& f, double x, double y) {
    const Grid& g = f.grid;
    double fx = (x - g.x0) / g.dx;
    fx -= g.nx * std::floor(fx / g.nx);
    int i0 = static_cast<int>(std::floor(fx));
    if (i0 >= g.nx) i0 = g.nx - 1;
    const double ax = fx - i0;
    double fy = (y - g.y0) / g.dy - 0.5;
    int j0 = static_cast<int>(std::floor(fy));
    double ay = fy - j0;
    if (j0 < 0) { j0 = 0; ay = 0.0; }
    if (j0 > g.ny - 2) { j0 = g.ny - 2; ay = 1.0; }
    const double lo = (1.0 - ax) * f.u_at(i0, j0) + ax * f.u_at(i0 + 1, j0);
    const double hi = (1.0 - ax) * f.u_at(i0, j0 + 1) + ax * f.u_at(i0 + 1, j0 + 1);
    return (1.0 - ay) * lo + ay * hi;
}

double sample_v(const FaceVelocities& f, double x, double y) {
    const Grid& g = f.grid;
    double fx = (x - g.x0) / g.dx - 0.5;
    fx -= g.nx * std::floor(fx / g.nx);
    int i0 = static_cast<int>(std::floor(fx));
    if (i0 >= g.nx) i0 = g.nx - 1;
    const double ax = fx - i0;
    const int i1 = (i0 + 1) % g.nx;
    double fy = (y - g.y0) / g.dy;
    int j0 = static_cast<int>(std::floor(fy));
    double ay = fy - j0;
    if (j0 < 0) { j0 = 0; ay = 0.0; }
    if (j0 > g.ny - 1) { j0 = g.ny - 1; ay = 1.0; }
    const double lo = (1.0 - ax) * f.v_at(i0, j0) + ax * f.v_at(i1, j0);
    const double hi = (1.0 - ax) * f.v_at(i0, j0 + 1) + ax * f.v_at(i1, j0 + 1);
    return (1.0 - ay) * lo + ay * hi;
}

}  // namespace

ScalarField ftle_field(const WindField& w, double t0, double horizon, double seed_spacing) {
    if (horizon <= 0.0) throw PreconditionError("ftle_field: horizon must be positive");
    const double tf = t0 + horizon;
    if (t0 < w.time_min() || tf > w.time_max())
        throw TimeRangeError("ftle_field: wind data does not cover the requested horizon");
    const Grid& g = w.grid();
    const double delta = seed_spacing > 0.0 ? seed_spacing : g.dx / 10.0;

    // shared step size from the stiffest wind sample we can see cheaply
    double speed = 1e-12;
    for (double t : {t0, 0.5 * (t0 + tf), tf}) speed = std::max(speed, w.sample(t).max_speed());
    const double target = 0.25 * std::min(g.dx, g.dy) / speed;
    const long nsteps = std::max(1L, static_cast<long>(std::ceil(horizon / target)));
    if (nsteps > 20'000'000)
        throw PreconditionError("ftle_field: trajectory step count exceeds 2e7, check wind speed");
    const double dt = horizon / static_cast<double>(nsteps);

    const int n = g.ncells();
    std::vector<double> xs(4 * n), ys(4 * n);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double xc = g.x0 + (i + 0.5) * g.dx;
            const double yc = g.y0 + (j + 0.5) * g.dy;
            const int k = 4 * g.idx(i, j);
            xs[k + 0] = xc + delta; ys[k + 0] = yc;  // east
            xs[k + 1] = xc - delta; ys[k + 1] = yc;  // west
            xs[k + 2] = xc;         ys[k + 2] = yc + delta;  // north
            xs[k + 3] = xc;         ys[k + 3] = yc - delta;  // south
        }
    }

    const double ylo = g.y0, yhi = g.y0 + g.ly();
    auto reflect = [&](double y) {
        for (int guard = 0; guard < 64 && (y < ylo || y > yhi); ++guard) {
            if (y < ylo) y = 2.0 * ylo - y;
            if (y > yhi) y = 2.0 * yhi - y;
        }
        return y;
    };

    for (long s = 0; s < nsteps; ++s) {
        const double t = t0 + s * dt;
        const FaceVelocities f1 = w.sample(t);
        const FaceVelocities f2 = w.sample(t + 0.5 * dt);
        const FaceVelocities f4 = w.sample(std::min(t + dt, tf));
        for (size_t p = 0; p < xs.size(); ++p) {
            const double x = xs[p], y = ys[p];
            const double k1x = sample_u(f1, x, y), k1y = sample_v(f1, x, y);
            double px = x + 0.5 * dt * k1x, py = reflect(y + 0.5 * dt * k1y);
            const double k2x = sample_u(f2, px, py), k2y = sample_v(f2, px, py);
            px = x + 0.5 * dt * k2x;
            py = reflect(y + 0.5 * dt * k2y);
            const double k3x = sample_u(f2, px, py), k3y = sample_v(f2, px, py);
            px = x + dt * k3x;
            py = reflect(y + dt * k3y);
            const double k4x = sample_u(f4, px, py), k4y = sample_v(f4, px, py);
            xs[p] = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            ys[p] = reflect(y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y));
        }
    }

    ScalarField out(g);
    for (int k = 0; k < n; ++k) {
        const int b = 4 * k;
        const double f11 = (xs[b + 0] - xs[b + 1]) / (2.0 * delta);
        const double f21 = (ys[b + 0] - ys[b + 1]) / (2.0 * delta);
        const double f12 = (xs[b + 2] - xs[b + 3]) / (2.0 * delta);
        const double f22 = (ys[b + 2] - ys[b + 3]) / (2.0 * delta);
        const double c11 = f11 * f11 + f21 * f21;
        const double c12 = f11 * f12 + f21 * f22;
        const double c22 = f12 * f12 + f22 * f22;
        const double disc = std::sqrt(std::max((c11 - c22) * (c11 - c22) + 4.0 * c12 * c12, 0.0));
        const double lmax = std::max(0.5 * (c11 + c22 + disc), 1e-300);
        out.values[k] = std::log(lmax) / (2.0 * horizon);
    }
    return out;
}

DiffusivityEstimate effective_diffusivity(double lambda, double plume_width,
                                          double boundary_scale) {
    if (lambda < 0.0 || plume_width < 0.0 || boundary_scale < 0.0)
        throw PreconditionError("effective_diffusivity: inputs must be >= 0");
    return {lambda, plume_width, boundary_scale, lambda * plume_width * boundary_scale};
}

double reconstructible_length_scale(double mean_speed, double time_scale) {
    if (mean_speed < 0.0 || time_scale < 0.0)
        throw PreconditionError("reconstructible_length_scale: inputs must be >= 0");
    return mean_speed * time_scale;
}

double length_in_grid_boxes(double length, const Grid& grid) { return length / grid.dx; }

}  // namespace ctm
