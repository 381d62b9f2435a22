#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctm/errors.hpp"
#include "ctm/field_io.hpp"
#include "ctm/harness.hpp"

namespace fs = std::filesystem;
using namespace ctm;

namespace {

int cmd_twin(const std::string& config, const std::string& window, const std::string& out) {
    TwinConfig cfg = parse_config(config);
    const double w = parse_duration(window);
    const std::string dir = out.empty() ? cfg.out_dir : out;
    TwinOutcome res = run_twin(cfg, w, dir);
    write_report_csv(dir + "/report.csv", {res.report});
    RunManifest m;
    m.version = kVersion;
    {
        std::ifstream is(config);
        std::ostringstream buf;
        buf << is.rdbuf();
        m.config_echo = buf.str();
    }
    m.windows = {res.entry};
    write_manifest(dir + "/manifest.json", m);
    std::printf("window_hours=%.17g rel_l2_pct=%.17g cost_reduction_orders=%.17g iterations=%d\n",
                res.report.window_hours, res.report.rel_l2_pct,
                res.report.cost_reduction_orders, res.report.iterations);
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& out) {
    TwinConfig cfg = parse_config(config);
    const std::string dir = out.empty() ? cfg.out_dir : out;
    SweepResult res = run_sweep(cfg, dir);
    size_t failed = 0;
    for (const ManifestEntry& e : res.manifest.windows)
        if (!e.ok) {
            ++failed;
            std::fprintf(stderr, "window %gh failed: %s\n", e.window_seconds / 3600.0,
                         e.error.c_str());
        }
    std::printf("%zu/%zu windows completed, report at %s/report.csv\n",
                res.manifest.windows.size() - failed, res.manifest.windows.size(), dir.c_str());
    return failed == res.manifest.windows.size() && !res.manifest.windows.empty() ? 2 : 0;
}

int cmd_forward(const std::string& config, const std::string& out) {
    TwinConfig cfg = parse_config(config);
    const std::string dir = out.empty() ? cfg.out_dir : out;
    fs::create_directories(dir);
    const Grid g = cfg.make_grid();
    const WindField w = cfg.make_wind_field();
    const ScalarField truth = make_plume(g, cfg.plume);
    const double tf = cfg.t0 + cfg.windows.back();
    std::vector<ScalarField> traj;
    auto [final_field, log] =
        integrate_forward(truth, w, cfg.t0, tf, cfg.scheme, cfg.diffusion,
                          cfg.dump_cadence > 0 ? &traj : nullptr);
    write_field_file(dir + "/initial.field", truth, cfg.t0);
    if (cfg.dump_cadence > 0) {
        for (size_t k = cfg.dump_cadence; k < traj.size();
             k += static_cast<size_t>(cfg.dump_cadence)) {
            char name[64];
            std::snprintf(name, sizeof name, "/step_%06zu.field", k);
            write_field_file(dir + name, traj[k], log.schedule.steps[k].t);
        }
    }
    write_field_file(dir + "/final.field", final_field, tf);
    std::printf("%ld steps, max cfl %.3f, mass drift %.3e\n", log.steps, log.max_cfl,
                log.mass_final - log.mass_initial);
    return 0;
}

int cmd_ftle(const std::string& config, const std::string& horizon, const std::string& out) {
    TwinConfig cfg = parse_config(config);
    const std::string dir = out.empty() ? cfg.out_dir : out;
    fs::create_directories(dir);
    const WindField w = cfg.make_wind_field();
    const double h = parse_duration(horizon);
    const ScalarField f = ftle_field(w, cfg.t0, h);
    write_field_file(dir + "/ftle.field", f, cfg.t0);
    double peak = f.values.empty() ? 0.0 : f.values[0];
    for (double v : f.values) peak = std::max(peak, v);
    std::printf("ftle field written, max %.6e 1/s\n", peak);
    return 0;
}

int cmd_diagnose(const std::string& truth_path, const std::string& estimate_path,
                 double background, double rmax) {
    const FieldDump truth = read_field_file(truth_path);
    const FieldDump estimate = read_field_file(estimate_path);
    const Grid& g = truth.field.grid;
    const double r = rmax > 0.0 ? rmax : 0.5 * std::max(g.nx * g.dx, g.ny * g.dy);
    std::printf("rel_l2_pct=%.17g\n", rel_l2_error(estimate.field, truth.field, background));
    std::printf("com_err_pct=%.17g\n",
                center_of_mass_error(estimate.field, truth.field, background, r));
    std::printf("mass_err_pct=%.17g\n", total_mass_error(estimate.field, truth.field, background));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D tracer-transport twin laboratory: forward advection, adjoint-based "
                 "source inversion, and window-sweep diagnostics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    app.footer("Config file keys and their defaults:\n\n" + default_config_text());

    std::string config, window, out, horizon, truth_path, estimate_path;
    double background = 1.0, rmax = 0.0;

    CLI::App* twin = app.add_subcommand("twin", "run one twin experiment at a fixed window");
    twin->add_option("--config", config, "config file")->required();
    twin->add_option("--window", window, "assimilation window, e.g. 1800, 0.5h, 2d")->required();
    twin->add_option("--out", out, "output directory (default: 'out' from the config)");

    CLI::App* sweep = app.add_subcommand("sweep", "run every configured window");
    sweep->add_option("--config", config, "config file")->required();
    sweep->add_option("--out", out, "output directory (default: 'out' from the config)");

    CLI::App* forward = app.add_subcommand("forward", "transport only, dump fields at cadence");
    forward->add_option("--config", config, "config file")->required();
    forward->add_option("--out", out, "output directory (default: 'out' from the config)");

    CLI::App* ftle = app.add_subcommand("ftle", "finite-time stretching-rate field");
    ftle->add_option("--config", config, "config file")->required();
    ftle->add_option("--horizon", horizon, "integration horizon, e.g. 4d")->required();
    ftle->add_option("--out", out, "output directory (default: 'out' from the config)");

    CLI::App* diagnose = app.add_subcommand("diagnose", "recompute metrics from stored dumps");
    diagnose->add_option("--truth", truth_path, "truth field dump")->required();
    diagnose->add_option("--estimate", estimate_path, "reconstructed field dump")->required();
    diagnose->add_option("--background", background, "background concentration")->required();
    diagnose->add_option("--rmax", rmax,
                         "displacement normalization for the center-of-mass error "
                         "(default: half the longer domain side)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (twin->parsed()) return cmd_twin(config, window, out);
        if (sweep->parsed()) return cmd_sweep(config, out);
        if (forward->parsed()) return cmd_forward(config, out);
        if (ftle->parsed()) return cmd_ftle(config, horizon, out);
        if (diagnose->parsed()) return cmd_diagnose(truth_path, estimate_path, background, rmax);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
