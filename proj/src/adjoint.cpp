#include "ctm/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ctm/errors.hpp"

namespace ctm {

AdjointVariant adjoint_variant_from_string(const std::string& s) {
    if (s == "continuous") return AdjointVariant::continuous;
    if (s == "discrete_transpose") return AdjointVariant::discrete_transpose;
    throw ConfigError("adjoint: unknown variant '" + s +
                      "' (expected continuous|discrete_transpose)");
}

std::string to_string(AdjointVariant v) {
    return v == AdjointVariant::continuous ? "continuous" : "discrete_transpose";
}

std::vector<double> StepMatrix::apply(const std::vector<double>& x) const {
    std::vector<double> y(static_cast<size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        const double xk = x[static_cast<size_t>(k)];
        if (xk == 0.0) continue;
        for (int p = col_ptr[static_cast<size_t>(k)]; p < col_ptr[static_cast<size_t>(k) + 1]; ++p)
            y[static_cast<size_t>(row_idx[static_cast<size_t>(p)])] += val[static_cast<size_t>(p)] * xk;
    }
    return y;
}

std::vector<double> StepMatrix::apply_transpose(const std::vector<double>& x) const {
    std::vector<double> y(static_cast<size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int p = col_ptr[static_cast<size_t>(k)]; p < col_ptr[static_cast<size_t>(k) + 1]; ++p)
            acc += val[static_cast<size_t>(p)] * x[static_cast<size_t>(row_idx[static_cast<size_t>(p)])];
        y[static_cast<size_t>(k)] = acc;
    }
    return y;
}

double StepMatrix::column_sum(int k) const {
    double s = 0.0;
    for (int p = col_ptr[static_cast<size_t>(k)]; p < col_ptr[static_cast<size_t>(k) + 1]; ++p)
        s += val[static_cast<size_t>(p)];
    return s;
}

namespace {

void check_cap(const Grid& g, int cap, const char* who) {
    if (g.ncells() > cap)
        throw PreconditionError(std::string(who) + ": grid has " + std::to_string(g.ncells()) +
                                " cells, discrete-transpose cap is " + std::to_string(cap));
}

StepMatrix from_columns(const Grid& g, const std::vector<std::vector<double>>& cols) {
    StepMatrix m;
    m.n = g.ncells();
    m.col_ptr.assign(static_cast<size_t>(m.n) + 1, 0);
    for (int k = 0; k < m.n; ++k) {
        m.col_ptr[static_cast<size_t>(k)] = static_cast<int>(m.row_idx.size());
        const auto& c = cols[static_cast<size_t>(k)];
        for (int r = 0; r < m.n; ++r) {
            if (c[static_cast<size_t>(r)] != 0.0) {
                m.row_idx.push_back(r);
                m.val.push_back(c[static_cast<size_t>(r)]);
            }
        }
    }
    m.col_ptr[static_cast<size_t>(m.n)] = static_cast<int>(m.row_idx.size());
    return m;
}

}  // namespace

StepMatrix assemble_step_matrix(const FaceVelocities& faces, double dt, const SchemeSpec& spec,
                                int matrix_cap) {
    check_cap(faces.grid, matrix_cap, "assemble_step_matrix");
    const Grid& g = faces.grid;
    std::vector<std::vector<double>> cols(static_cast<size_t>(g.ncells()));
    ScalarField e(g);
    for (int k = 0; k < g.ncells(); ++k) {
        e.values.assign(e.values.size(), 0.0);
        e.values[static_cast<size_t>(k)] = 1.0;
        cols[static_cast<size_t>(k)] = advect_step(e, faces, dt, spec).values;
    }
    return from_columns(g, cols);
}

StepMatrix assemble_linearized_step_matrix(const ScalarField& base, const FaceVelocities& faces,
                                           double dt, const SchemeSpec& spec, int matrix_cap) {
    check_cap(faces.grid, matrix_cap, "assemble_linearized_step_matrix");
    if (!(base.grid == faces.grid))
        throw ShapeError("assemble_linearized_step_matrix: base and wind grids differ");
    const Grid& g = base.grid;
    const ScalarField f0 = advect_step(base, faces, dt, spec);
    double scale = 1.0;
    for (double v : base.values) scale = std::max(scale, std::abs(v));
    const double h = 1e-7 * scale;
    std::vector<std::vector<double>> cols(static_cast<size_t>(g.ncells()));
    ScalarField pert = base;
    for (int k = 0; k < g.ncells(); ++k) {
        const double saved = pert.values[static_cast<size_t>(k)];
        pert.values[static_cast<size_t>(k)] = saved + h;
        ScalarField fk = advect_step(pert, faces, dt, spec);
        pert.values[static_cast<size_t>(k)] = saved;
        std::vector<double> col(static_cast<size_t>(g.ncells()));
        for (int r = 0; r < g.ncells(); ++r)
            col[static_cast<size_t>(r)] =
                (fk.values[static_cast<size_t>(r)] - f0.values[static_cast<size_t>(r)]) / h;
        cols[static_cast<size_t>(k)] = std::move(col);
    }
    return from_columns(g, cols);
}

ScalarField integrate_adjoint(const ScalarField& lambda_f, const WindField& w, double t0,
                              double tf, const SchemeSpec& spec, const DiffusionSpec& d,
                              const AdjointSpec& adj,
                              const std::vector<ScalarField>* forward_trajectory) {
    if (!(lambda_f.grid == w.grid()))
        throw ShapeError("integrate_adjoint: field and wind grids differ");
    const StepSchedule sched = plan_schedule(w, t0, tf, spec, d);
    if (sched.steps.empty()) return lambda_f;

    const bool discrete = adj.variant == AdjointVariant::discrete_transpose;
    if (discrete) {
        check_cap(lambda_f.grid, adj.matrix_cap, "integrate_adjoint");
        if (spec.scheme == AdvectionScheme::vanleer2 && !forward_trajectory)
            throw PreconditionError(
                "integrate_adjoint: vanleer2 discrete transpose needs the forward trajectory");
    }
    if (forward_trajectory && forward_trajectory->size() != sched.steps.size())
        throw PreconditionError("integrate_adjoint: forward trajectory has " +
                                std::to_string(forward_trajectory->size()) +
                                " states but the schedule has " +
                                std::to_string(sched.steps.size()) +
                                " sub-steps (forward/adjoint pairing mismatch)");

    ScalarField lam = lambda_f;
    for (int k = static_cast<int>(sched.steps.size()) - 1; k >= 0; --k) {
        const SubStep& s = sched.steps[static_cast<size_t>(k)];
        const FaceVelocities faces = w.sample(s.t + 0.5 * s.dt);
        // forward sub-step was advect then diffuse; the transpose runs the
        // (self-adjoint) diffusion first, then the reversed advection
        lam = diffuse_step(lam, d, s.dt);
        if (!discrete) {
            lam = advect_step(lam, faces.reversed(), s.dt, spec, k + 1);
        } else {
            const StepMatrix m =
                spec.scheme == AdvectionScheme::upwind1
                    ? assemble_step_matrix(faces, s.dt, spec, adj.matrix_cap)
                    : assemble_linearized_step_matrix((*forward_trajectory)[static_cast<size_t>(k)],
                                                      faces, s.dt, spec, adj.matrix_cap);
            ScalarField next(lam.grid);
            next.values = m.apply_transpose(lam.values);
            lam = next;
        }
    }
    return lam;
}

double dot_product_test(const FaceVelocities& faces, double dt, const SchemeSpec& spec,
                        const AdjointSpec& adj, int trials, unsigned seed) {
    const Grid& g = faces.grid;
    const bool discrete = adj.variant == AdjointVariant::discrete_transpose;
    StepMatrix m;
    if (discrete) {
        if (spec.scheme == AdvectionScheme::upwind1) {
            m = assemble_step_matrix(faces, dt, spec, adj.matrix_cap);
        } else {
            m = assemble_linearized_step_matrix(ScalarField(g, 1.0), faces, dt, spec,
                                                adj.matrix_cap);
        }
    }
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        ScalarField u(g), v(g);
        for (auto& x : u.values) x = dist(rng);
        for (auto& x : v.values) x = dist(rng);
        ScalarField au(g), atv(g);
        if (discrete) {
            au.values = m.apply(u.values);
            atv.values = m.apply_transpose(v.values);
        } else {
            au = advect_step(u, faces, dt, spec, 0);
            atv = advect_step(v, faces.reversed(), dt, spec, 1);
        }
        const double defect =
            std::abs(inner_product(au, v) - inner_product(u, atv)) / (norm_l2(u) * norm_l2(v));
        worst = std::max(worst, defect);
    }
    return worst;
}

}  // namespace ctm
