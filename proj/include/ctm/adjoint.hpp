#pragma once
#include <vector>

#include "ctm/grid.hpp"
#include "ctm/transport.hpp"
#include "ctm/wind.hpp"

namespace ctm {

// continuous: integrate the adjoint equation with the same transport routine,
// winds negated, forward sub-step schedule replayed in reverse (the default,
// and the production configuration). discrete_transpose: apply the exact
// transpose of each forward step matrix; exact for the linear upwind1 scheme,
// linearized about the forward trajectory for vanleer2. Intended as a
// verification oracle on small grids.
enum class AdjointVariant { continuous, discrete_transpose };

struct AdjointSpec {
    AdjointVariant variant = AdjointVariant::continuous;
    int matrix_cap = 10'000;  // discrete_transpose refuses larger grids
};

// One advection step as an explicit sparse operator, compressed sparse
// column; column k holds advect_step(e_k).
struct StepMatrix {
    int n = 0;
    std::vector<int> col_ptr;
    std::vector<int> row_idx;
    std::vector<double> val;

    std::vector<double> apply(const std::vector<double>& x) const;
    std::vector<double> apply_transpose(const std::vector<double>& x) const;
    double column_sum(int k) const;
};

// Exact matrix of one advect_step for the linear upwind1 scheme.
StepMatrix assemble_step_matrix(const FaceVelocities& faces, double dt, const SchemeSpec& spec,
                                int matrix_cap = 10'000);

// Jacobian of one advect_step about base, by forward-difference probing of
// basis perturbations. For upwind1 this reproduces assemble_step_matrix to
// rounding; for vanleer2 it is the linearization the discrete adjoint uses.
StepMatrix assemble_linearized_step_matrix(const ScalarField& base, const FaceVelocities& faces,
                                           double dt, const SchemeSpec& spec,
                                           int matrix_cap = 10'000);

// Carries lambda_f at tf back to t0 against the same schedule the forward
// integration used (plan_schedule is deterministic, so recomputing it here
// reproduces the forward sub-steps exactly). forward_trajectory is required
// by the discrete_transpose variant when the scheme is nonlinear (vanleer2):
// it must hold the pre-advection field of every forward sub-step, as filled
// in by integrate_forward's trajectory output.
ScalarField integrate_adjoint(const ScalarField& lambda_f, const WindField& w, double t0,
                              double tf, const SchemeSpec& spec, const DiffusionSpec& d,
                              const AdjointSpec& adj,
                              const std::vector<ScalarField>* forward_trajectory = nullptr);

// max over random pairs of |<A u, v> - <u, A~ v>| / (|u| |v|) for one step,
// where A~ is the adjoint step of the requested variant.
double dot_product_test(const FaceVelocities& faces, double dt, const SchemeSpec& spec,
                        const AdjointSpec& adj, int trials, unsigned seed = 1234);

AdjointVariant adjoint_variant_from_string(const std::string& s);
std::string to_string(AdjointVariant v);

}  // namespace ctm
