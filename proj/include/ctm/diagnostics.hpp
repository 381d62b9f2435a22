#pragma once

#include <vector>

#include "ctm/grid.hpp"
#include "ctm/transport.hpp"
#include "ctm/wind.hpp"

namespace ctm {

// Region reachable by one adjoint back-integration of the observations,
// thresholded at one percent of the source excess above background.
struct InfluenceRegion {
    std::vector<unsigned char> mask;
    double area = 0.0;       // m^2
    double threshold = 0.0;  // concentration excess defining the boundary
};

struct DiffusivityEstimate {
    double lambda = 0.0;          // stretching rate, 1/s
    double plume_width = 0.0;     // m
    double boundary_scale = 0.0;  // m
    double d_h = 0.0;             // m^2/s
};

struct LossEstimate {
    double percent = 0.0;
    bool clamped = false;  // influence area came out below the true area
};

InfluenceRegion area_of_influence(const ScalarField& obs, const WindField& w, double window,
                                  const SchemeSpec& scheme, const PlumeSpec& plume,
                                  double t0 = 0.0, const DiffusionSpec& diffusion = {});

// Area growth factor of a rectangle whose every boundary advances by
// sqrt(d_h * t).
double broadening_estimate(const PlumeSpec& plume, double d_h, double t);

LossEstimate loss_estimate(double area_true, double area_influence);

double center_of_mass_error(const ScalarField& estimate, const ScalarField& truth,
                            double background, double r_max);

double total_mass_error(const ScalarField& estimate, const ScalarField& truth, double background);

// Largest finite-time stretching exponent per cell, from four-point
// trajectory clusters advected with a classical fourth-order scheme.
// seed_spacing <= 0 selects dx/10.
ScalarField ftle_field(const WindField& w, double t0, double horizon, double seed_spacing = 0.0);

DiffusivityEstimate effective_diffusivity(double lambda, double plume_width,
                                          double boundary_scale);

double reconstructible_length_scale(double mean_speed, double time_scale);
double length_in_grid_boxes(double length, const Grid& grid);

}  // namespace ctm
