#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctm/adjoint.hpp"
#include "ctm/diagnostics.hpp"
#include "ctm/field_io.hpp"
#include "ctm/grid.hpp"
#include "ctm/harness.hpp"
#include "ctm/inversion.hpp"
#include "ctm/transport.hpp"
#include "ctm/wind.hpp"

namespace py = pybind11;
using namespace ctm;

PYBIND11_MODULE(ctmlab, m) {
    m.doc() = "2D tracer-transport twin laboratory: advection, adjoint gradients, "
              "source inversion, and mixing diagnostics";
    m.attr("__version__") = kVersion;

    py::class_<Grid>(m, "Grid")
        .def(py::init<int, int, double, double, double, double>(), py::arg("nx"), py::arg("ny"),
             py::arg("dx"), py::arg("dy"), py::arg("x0") = 0.0, py::arg("y0") = 0.0)
        .def_readonly("nx", &Grid::nx)
        .def_readonly("ny", &Grid::ny)
        .def_readonly("dx", &Grid::dx)
        .def_readonly("dy", &Grid::dy)
        .def_readonly("x0", &Grid::x0)
        .def_readonly("y0", &Grid::y0)
        .def("ncells", &Grid::ncells)
        .def("cell_area", &Grid::cell_area)
        .def("lx", &Grid::lx)
        .def("ly", &Grid::ly);

    py::class_<ScalarField>(m, "ScalarField")
        .def(py::init<const Grid&, double>(), py::arg("grid"), py::arg("fill") = 0.0)
        .def_readonly("grid", &ScalarField::grid)
        .def_readwrite("values", &ScalarField::values)
        .def("at", [](const ScalarField& f, int i, int j) { return f.at(i, j); })
        .def("set", [](ScalarField& f, int i, int j, double v) { f.at(i, j) = v; })
        .def("min_value", &ScalarField::min_value);

    py::class_<PlumeSpec>(m, "PlumeSpec")
        .def(py::init<>())
        .def_readwrite("center_x", &PlumeSpec::center_x)
        .def_readwrite("center_y", &PlumeSpec::center_y)
        .def_readwrite("side_x", &PlumeSpec::side_x)
        .def_readwrite("side_y", &PlumeSpec::side_y)
        .def_readwrite("background", &PlumeSpec::background)
        .def_readwrite("excess_factor", &PlumeSpec::excess_factor);

    py::enum_<AdvectionScheme>(m, "AdvectionScheme")
        .value("upwind1", AdvectionScheme::upwind1)
        .value("vanleer2", AdvectionScheme::vanleer2);
    py::enum_<SplittingMode>(m, "SplittingMode")
        .value("cross", SplittingMode::cross)
        .value("alternate", SplittingMode::alternate);
    py::enum_<AdjointVariant>(m, "AdjointVariant")
        .value("continuous", AdjointVariant::continuous)
        .value("discrete_transpose", AdjointVariant::discrete_transpose);
    py::enum_<Termination>(m, "Termination")
        .value("max_iters", Termination::max_iters)
        .value("grad_tol", Termination::grad_tol)
        .value("cost_tol", Termination::cost_tol)
        .value("line_search_failure", Termination::line_search_failure);

    py::class_<SchemeSpec>(m, "SchemeSpec")
        .def(py::init<>())
        .def_readwrite("scheme", &SchemeSpec::scheme)
        .def_readwrite("cfl_max", &SchemeSpec::cfl_max)
        .def_readwrite("splitting", &SchemeSpec::splitting);

    py::class_<DiffusionSpec>(m, "DiffusionSpec")
        .def(py::init<>())
        .def_readwrite("d_h", &DiffusionSpec::d_h)
        .def_readwrite("enabled", &DiffusionSpec::enabled);

    py::class_<AdjointSpec>(m, "AdjointSpec")
        .def(py::init<>())
        .def_readwrite("variant", &AdjointSpec::variant)
        .def_readwrite("matrix_cap", &AdjointSpec::matrix_cap);

    py::class_<MinimizerSpec>(m, "MinimizerSpec")
        .def(py::init<>())
        .def_readwrite("max_iters", &MinimizerSpec::max_iters)
        .def_readwrite("memory", &MinimizerSpec::memory)
        .def_readwrite("c1", &MinimizerSpec::c1)
        .def_readwrite("c2", &MinimizerSpec::c2)
        .def_readwrite("grad_tol", &MinimizerSpec::grad_tol)
        .def_readwrite("cost_tol", &MinimizerSpec::cost_tol)
        .def_readwrite("max_evals_per_search", &MinimizerSpec::max_evals_per_search);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def(py::init<>())
        .def_readwrite("t0", &ModelSpec::t0)
        .def_readwrite("tf", &ModelSpec::tf)
        .def_readwrite("scheme", &ModelSpec::scheme)
        .def_readwrite("diffusion", &ModelSpec::diffusion)
        .def_readwrite("adjoint", &ModelSpec::adjoint);

    py::class_<CostSpec>(m, "CostSpec")
        .def(py::init<>())
        .def_readwrite("observations", &CostSpec::observations)
        .def_readwrite("background", &CostSpec::background)
        .def_readwrite("obs_mask", &CostSpec::obs_mask);

    py::class_<WindField>(m, "WindField")
        .def_static("uniform", &WindField::uniform, py::arg("grid"), py::arg("speed"))
        .def_static("shear", &WindField::shear, py::arg("grid"), py::arg("rate"))
        .def_static("bickley_jet",
                    [](const Grid& g) { return WindField::bickley_jet(g); }, py::arg("grid"))
        .def("grid", &WindField::grid, py::return_value_policy::copy)
        .def("time_min", &WindField::time_min)
        .def("time_max", &WindField::time_max);

    py::class_<TransportLog>(m, "TransportLog")
        .def_readonly("steps", &TransportLog::steps)
        .def_readonly("max_cfl", &TransportLog::max_cfl)
        .def_readonly("mass_initial", &TransportLog::mass_initial)
        .def_readonly("mass_final", &TransportLog::mass_final)
        .def_readonly("max_step_mass_drift", &TransportLog::max_step_mass_drift);

    py::class_<IterRecord>(m, "IterRecord")
        .def_readonly("iter", &IterRecord::iter)
        .def_readonly("cost", &IterRecord::cost)
        .def_readonly("normalized_cost", &IterRecord::normalized_cost)
        .def_readonly("grad_norm", &IterRecord::grad_norm)
        .def_readonly("step_length", &IterRecord::step_length);

    py::class_<InversionResult>(m, "InversionResult")
        .def_readonly("c0_hat", &InversionResult::c0_hat)
        .def_readonly("history", &InversionResult::history)
        .def_readonly("iterations", &InversionResult::iterations)
        .def_readonly("termination", &InversionResult::termination)
        .def_readonly("cost_evals", &InversionResult::cost_evals);

    py::class_<InfluenceRegion>(m, "InfluenceRegion")
        .def_readonly("mask", &InfluenceRegion::mask)
        .def_readonly("area", &InfluenceRegion::area)
        .def_readonly("threshold", &InfluenceRegion::threshold);

    py::class_<LossEstimate>(m, "LossEstimate")
        .def_readonly("percent", &LossEstimate::percent)
        .def_readonly("clamped", &LossEstimate::clamped);

    py::class_<DiffusivityEstimate>(m, "DiffusivityEstimate")
        .def_readonly("lambda_", &DiffusivityEstimate::lambda)
        .def_readonly("plume_width", &DiffusivityEstimate::plume_width)
        .def_readonly("boundary_scale", &DiffusivityEstimate::boundary_scale)
        .def_readonly("d_h", &DiffusivityEstimate::d_h);

    py::class_<DiagnosticsReport>(m, "DiagnosticsReport")
        .def_readonly("window_hours", &DiagnosticsReport::window_hours)
        .def_readonly("rel_l2_pct", &DiagnosticsReport::rel_l2_pct)
        .def_readonly("com_err_pct", &DiagnosticsReport::com_err_pct)
        .def_readonly("mass_err_pct", &DiagnosticsReport::mass_err_pct)
        .def_readonly("area_ratio_measured", &DiagnosticsReport::area_ratio_measured)
        .def_readonly("area_ratio_estimated", &DiagnosticsReport::area_ratio_estimated)
        .def_readonly("loss_est_pct", &DiagnosticsReport::loss_est_pct)
        .def_readonly("cost_reduction_orders", &DiagnosticsReport::cost_reduction_orders)
        .def_readonly("iterations", &DiagnosticsReport::iterations);

    py::class_<TwinConfig>(m, "TwinConfig")
        .def(py::init<>())
        .def_readwrite("nx", &TwinConfig::nx)
        .def_readwrite("ny", &TwinConfig::ny)
        .def_readwrite("lx", &TwinConfig::lx)
        .def_readwrite("ly", &TwinConfig::ly)
        .def_readwrite("y0", &TwinConfig::y0)
        .def_readwrite("wind_kind", &TwinConfig::wind_kind)
        .def_readwrite("wind_params", &TwinConfig::wind_params)
        .def_readwrite("wind_file", &TwinConfig::wind_file)
        .def_readwrite("plume", &TwinConfig::plume)
        .def_readwrite("scheme", &TwinConfig::scheme)
        .def_readwrite("diffusion", &TwinConfig::diffusion)
        .def_readwrite("adjoint", &TwinConfig::adjoint)
        .def_readwrite("minimizer", &TwinConfig::minimizer)
        .def_readwrite("t0", &TwinConfig::t0)
        .def_readwrite("windows", &TwinConfig::windows)
        .def_readwrite("out_dir", &TwinConfig::out_dir)
        .def_readwrite("dump_cadence", &TwinConfig::dump_cadence)
        .def("make_grid", &TwinConfig::make_grid)
        .def("make_wind_field", &TwinConfig::make_wind_field)
        .def("effective_wind_params", &TwinConfig::effective_wind_params)
        .def("validate", &TwinConfig::validate);

    py::class_<TwinOutcome>(m, "TwinOutcome")
        .def_readonly("inversion", &TwinOutcome::inversion)
        .def_readonly("report", &TwinOutcome::report);

    m.def("make_plume", &make_plume, py::arg("grid"), py::arg("spec"));
    m.def("plume_footprint", &plume_footprint, py::arg("grid"), py::arg("spec"));
    m.def("field_integral", &field_integral);
    m.def("inner_product", &inner_product);
    m.def("norm_l2", &norm_l2);
    m.def("rel_l2_error", &rel_l2_error, py::arg("estimate"), py::arg("truth"),
          py::arg("background"));

    m.def(
        "integrate_forward",
        [](const ScalarField& c0, const WindField& w, double t0, double tf,
           const SchemeSpec& spec, const DiffusionSpec& d) {
            return integrate_forward(c0, w, t0, tf, spec, d);
        },
        py::arg("c0"), py::arg("wind"), py::arg("t0"), py::arg("tf"),
        py::arg("scheme") = SchemeSpec{}, py::arg("diffusion") = DiffusionSpec{});
    m.def(
        "integrate_adjoint",
        [](const ScalarField& lf, const WindField& w, double t0, double tf,
           const SchemeSpec& spec, const DiffusionSpec& d, const AdjointSpec& adj) {
            return integrate_adjoint(lf, w, t0, tf, spec, d, adj);
        },
        py::arg("lambda_f"), py::arg("wind"), py::arg("t0"), py::arg("tf"),
        py::arg("scheme") = SchemeSpec{}, py::arg("diffusion") = DiffusionSpec{},
        py::arg("adjoint") = AdjointSpec{});

    m.def("cost_and_gradient", &cost_and_gradient, py::arg("c0"), py::arg("cost"),
          py::arg("wind"), py::arg("model"));
    m.def("minimize", &minimize, py::arg("c0_init"), py::arg("cost"), py::arg("wind"),
          py::arg("model"), py::arg("spec"));
    m.def("run_inversion", &run_inversion, py::arg("plume"), py::arg("window"), py::arg("wind"),
          py::arg("model"), py::arg("spec"));

    m.def(
        "area_of_influence",
        [](const ScalarField& obs, const WindField& w, double window, const SchemeSpec& scheme,
           const PlumeSpec& plume, double t0, const DiffusionSpec& d) {
            return area_of_influence(obs, w, window, scheme, plume, t0, d);
        },
        py::arg("observations"), py::arg("wind"), py::arg("window"),
        py::arg("scheme") = SchemeSpec{}, py::arg("plume") = PlumeSpec{}, py::arg("t0") = 0.0,
        py::arg("diffusion") = DiffusionSpec{});
    m.def("broadening_estimate", &broadening_estimate, py::arg("plume"), py::arg("d_h"),
          py::arg("t"));
    m.def("loss_estimate", &loss_estimate, py::arg("area_true"), py::arg("area_influence"));
    m.def("center_of_mass_error", &center_of_mass_error, py::arg("estimate"), py::arg("truth"),
          py::arg("background"), py::arg("r_max"));
    m.def("total_mass_error", &total_mass_error, py::arg("estimate"), py::arg("truth"),
          py::arg("background"));
    m.def(
        "ftle_field",
        [](const WindField& w, double t0, double horizon, double seed_spacing) {
            return ftle_field(w, t0, horizon, seed_spacing);
        },
        py::arg("wind"), py::arg("t0"), py::arg("horizon"), py::arg("seed_spacing") = 0.0);
    m.def("effective_diffusivity", &effective_diffusivity, py::arg("lambda_"),
          py::arg("plume_width"), py::arg("boundary_scale"));
    m.def("reconstructible_length_scale", &reconstructible_length_scale, py::arg("mean_speed"),
          py::arg("time_scale"));
    m.def("length_in_grid_boxes", &length_in_grid_boxes, py::arg("length"), py::arg("grid"));

    m.def("parse_config", &parse_config, py::arg("path"));
    m.def("parse_config_text", &parse_config_text, py::arg("text"),
          py::arg("origin") = "<string>");
    m.def("default_config_text", &default_config_text);
    m.def("parse_duration", &parse_duration, py::arg("text"));
    m.def(
        "run_twin",
        [](const TwinConfig& cfg, double window, const std::string& out_dir) {
            return run_twin(cfg, window, out_dir);
        },
        py::arg("config"), py::arg("window"), py::arg("out_dir"));
    m.def(
        "run_sweep",
        [](const TwinConfig& cfg, const std::string& out_dir) {
            SweepResult res = run_sweep(cfg, out_dir);
            return res.reports;
        },
        py::arg("config"), py::arg("out_dir"));

    m.def("write_field_file", &write_field_file, py::arg("path"), py::arg("field"),
          py::arg("time"));
    m.def(
        "read_field_file",
        [](const std::string& path) {
            FieldDump d = read_field_file(path);
            return py::make_tuple(d.field, d.time);
        },
        py::arg("path"));
}
