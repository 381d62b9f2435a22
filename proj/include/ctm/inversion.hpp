#pragma once
#include <string>
#include <utility>
#include <vector>

#include "ctm/adjoint.hpp"
#include "ctm/grid.hpp"
#include "ctm/transport.hpp"
#include "ctm/wind.hpp"

namespace ctm {

// Observations live at the end of the assimilation window. An empty mask
// means every cell is observed (the well-posed setup: as many observations
// as unknowns); a mask restricts the misfit to the selected cells.
struct CostSpec {
    ScalarField observations;
    double background = 1.0;
    std::vector<unsigned char> obs_mask;  // empty = full state
};

// Everything the cost needs to run the forward and adjoint model, minus the
// wind field itself (passed alongside, it is not copyable state).
struct ModelSpec {
    double t0 = 0.0;
    double tf = 0.0;
    SchemeSpec scheme;
    DiffusionSpec diffusion;
    AdjointSpec adjoint;
};

struct MinimizerSpec {
    int max_iters = 99;
    int memory = 8;
    double c1 = 1e-4;
    double c2 = 0.9;
    double grad_tol = 1e-12;   // relative to the initial gradient norm
    double cost_tol = 1e-16;   // normalized cost floor
    int max_evals_per_search = 25;
};

enum class Termination { max_iters, grad_tol, cost_tol, line_search_failure };
std::string to_string(Termination t);

struct IterRecord {
    int iter = 0;
    double cost = 0.0;
    double normalized_cost = 0.0;
    double grad_norm = 0.0;
    double step_length = 0.0;
};

struct InversionResult {
    ScalarField c0_hat;
    std::vector<IterRecord> history;  // row 0 is the starting point
    int iterations = 0;
    Termination termination = Termination::max_iters;
    long cost_evals = 0;
};

// J = 1/2 <H C(tf) - y, H C(tf) - y>, g = adjoint of the residual carried
// back to t0. The gradient is the Riesz representer under the area-weighted
// inner product, i.e. dJ = <g, dc0> with the same inner_product used
// everywhere else.
std::pair<double, ScalarField> cost_and_gradient(const ScalarField& c0, const CostSpec& cost,
                                                 const WindField& w, const ModelSpec& model);

// Limited-memory quasi-Newton minimization with a strong Wolfe line search.
InversionResult minimize(const ScalarField& c0_init, const CostSpec& cost, const WindField& w,
                         const ModelSpec& model, const MinimizerSpec& spec);

// Identical-twin protocol: build the truth plume, integrate it forward over
// the window to fabricate observations, then reconstruct starting from the
// flat background. Returns the result and the truth field.
std::pair<InversionResult, ScalarField> run_inversion(const PlumeSpec& plume, double window,
                                                      const WindField& w, const ModelSpec& model,
                                                      const MinimizerSpec& spec);

// CSV: iter,cost,normalized_cost,grad_norm,step_length
void write_cost_history(const std::string& path, const InversionResult& result);

}  // namespace ctm
