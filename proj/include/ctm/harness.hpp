#pragma once
#include <map>
#include <string>
#include <vector>

#include "ctm/diagnostics.hpp"
#include "ctm/inversion.hpp"

namespace ctm {

inline constexpr const char* kVersion = "1.0.0";

// Everything a twin experiment or sweep needs, parsed from one config file.
// Durations in the file accept s/h/d suffixes; bare numbers are seconds.
struct TwinConfig {
    int nx = 128;
    int ny = 64;
    double lx = 2.0e7;
    double ly = 6.0e6;
    double y0 = -3.0e6;

    std::string wind_kind = "bickley_jet";
    std::map<std::string, double> wind_params;
    std::string wind_file;

    // a 28x20-cell source on the default grid, centered on the jet core
    PlumeSpec plume{1.0e7, 0.0, 4.375e6, 1.875e6, 1.0, 2.0};
    SchemeSpec scheme{AdvectionScheme::vanleer2, 0.9, SplittingMode::cross};
    // mild explicit mixing; bleeds filaments and coherent cores that the
    // grid alone would preserve, so week-scale windows homogenize
    DiffusionSpec diffusion{2.0e5, true};
    AdjointSpec adjoint;
    MinimizerSpec minimizer{.max_iters = 60};

    double t0 = 0.0;
    // seconds, strictly increasing. The first five windows stay in the
    // recoverable regime (influence area below twice the source); the last
    // one sits past complete mixing, where reconstruction genuinely fails.
    std::vector<double> windows{900.0, 5400.0, 10800.0, 21600.0, 43200.0, 1728000.0};
    std::string out_dir = "runs";
    int dump_cadence = 0;  // forward subcommand: dump every N sub-steps, 0 = endpoints only

    Grid make_grid() const;
    WindField make_wind_field() const;
    void validate() const;  // throws ConfigError naming the offending field

    // Wind parameters the experiment actually runs with. For bickley_jet the
    // lab raises the wave amplitudes above the classic benchmark values
    // (eps1 = 0.3, eps2 = 0.6, eps3 = 0.45) so the stirring breaks the
    // central jet barrier and long windows mix completely; entries in
    // wind_params override these per key. Other kinds pass wind_params
    // through unchanged.
    std::map<std::string, double> effective_wind_params() const;
};

// Strict parser for the flat `key = value` format with [section] headers and
// # comments. Unknown sections, unknown keys, duplicate keys, and malformed
// values are errors carrying the line number.
TwinConfig parse_config(const std::string& path);
TwinConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

// The default config, serialized; every key documented with its default.
std::string default_config_text();

double parse_duration(const std::string& text);  // "1800", "0.5h", "2d" -> seconds

// One row of the sweep report.
struct DiagnosticsReport {
    double window_hours = 0.0;
    double rel_l2_pct = 0.0;
    double com_err_pct = 0.0;
    double mass_err_pct = 0.0;
    double area_ratio_measured = 0.0;
    double area_ratio_estimated = 0.0;
    double loss_est_pct = 0.0;
    double cost_reduction_orders = 0.0;
    int iterations = 0;
};

struct ManifestEntry {
    double window_seconds = 0.0;
    bool ok = false;
    std::string error;
    std::vector<std::string> files;  // relative to the sweep output directory
    double max_cfl = 0.0;
    std::string termination;
};

struct RunManifest {
    std::string version;
    std::string config_echo;
    std::string started_at;   // UTC, ISO 8601
    std::string finished_at;
    std::vector<ManifestEntry> windows;
};

struct TwinOutcome {
    InversionResult inversion;
    DiagnosticsReport report;
    ManifestEntry entry;
};

// Full twin pipeline for one window: truth, forward run, synthetic
// observations, influence-region measurement, inversion, metrics. Dumps
// truth/observations/influence mask/reconstruction/cost history into out_dir
// (created if needed). File paths recorded in the returned manifest entry
// are relative to rel_base when given, e.g. the enclosing sweep directory.
TwinOutcome run_twin(const TwinConfig& cfg, double window, const std::string& out_dir,
                     const std::string& rel_base = "");

struct SweepResult {
    std::vector<DiagnosticsReport> reports;  // successful windows, in window order
    RunManifest manifest;                    // all windows
};

// Runs every configured window (concurrently, capped by CTM_THREADS), then
// writes report.csv and manifest.json into out_dir. A failed window loses
// its report row but is recorded in the manifest; outputs are bit-identical
// for any worker count.
SweepResult run_sweep(const TwinConfig& cfg, const std::string& out_dir);

void write_report_csv(const std::string& path, const std::vector<DiagnosticsReport>& rows);
std::string report_csv_header();
void write_manifest(const std::string& path, const RunManifest& m);

// CTM_THREADS when set (must be a positive integer), hardware concurrency
// otherwise, always >= 1.
int worker_cap();

}  // namespace ctm
