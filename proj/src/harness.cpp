#include "ctm/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "ctm/errors.hpp"
#include "ctm/field_io.hpp"

namespace fs = std::filesystem;

namespace ctm {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& origin, int line, const std::string& key,
                    const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        fail_at(origin, line, "expected a number for '" + key + "', got '" + value + "'");
    return x;
}

int parse_int(const std::string& origin, int line, const std::string& key,
              const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || x < INT_MIN || x > INT_MAX)
        fail_at(origin, line, "expected an integer for '" + key + "', got '" + value + "'");
    return static_cast<int>(x);
}

bool parse_bool(const std::string& origin, int line, const std::string& key,
                const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    fail_at(origin, line, "expected true/false for '" + key + "', got '" + value + "'");
}

double parse_duration_at(const std::string& origin, int line, const std::string& key,
                         const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) fail_at(origin, line, "empty duration for '" + key + "'");
    double factor = 1.0;
    std::string num = v;
    switch (v.back()) {
        case 's': factor = 1.0; num = v.substr(0, v.size() - 1); break;
        case 'h': factor = 3600.0; num = v.substr(0, v.size() - 1); break;
        case 'd': factor = 86400.0; num = v.substr(0, v.size() - 1); break;
        default: break;
    }
    return factor * parse_number(origin, line, key, num);
}

const std::set<std::string>& allowed_wind_params(const std::string& kind) {
    static const std::set<std::string> uniform{"speed"};
    static const std::set<std::string> shear{"rate"};
    static const std::set<std::string> bickley{"u0",   "jet_width", "eps1", "eps2",
                                               "eps3", "c1",        "c2",   "c3"};
    static const std::set<std::string> none{};
    if (kind == "uniform") return uniform;
    if (kind == "shear") return shear;
    if (kind == "bickley_jet") return bickley;
    if (kind == "from_file") return none;
    throw ConfigError("wind: unknown kind '" + kind +
                      "' (expected uniform|shear|bickley_jet|from_file)");
}

std::string now_utc() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string window_dir_name(size_t index, double window_seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "w%02zu_%gh", index, window_seconds / 3600.0);
    return buf;
}

std::string serialize_config(const TwinConfig& c) {
    std::ostringstream os;
    os << "[grid]\n";
    os << "nx = " << c.nx << "\n";
    os << "ny = " << c.ny << "\n";
    os << "lx = " << fmt17(c.lx) << "\n";
    os << "ly = " << fmt17(c.ly) << "\n";
    os << "y0 = " << fmt17(c.y0) << "\n";
    os << "\n[wind]\n";
    os << "kind = " << c.wind_kind << "\n";
    if (!c.wind_file.empty()) os << "file = " << c.wind_file << "\n";
    for (const auto& [k, v] : c.effective_wind_params()) os << k << " = " << fmt17(v) << "\n";
    os << "\n[plume]\n";
    os << "center_x = " << fmt17(c.plume.center_x) << "\n";
    os << "center_y = " << fmt17(c.plume.center_y) << "\n";
    os << "side_x = " << fmt17(c.plume.side_x) << "\n";
    os << "side_y = " << fmt17(c.plume.side_y) << "\n";
    os << "background = " << fmt17(c.plume.background) << "\n";
    os << "excess_factor = " << fmt17(c.plume.excess_factor) << "\n";
    os << "\n[scheme]\n";
    os << "kind = " << to_string(c.scheme.scheme) << "\n";
    os << "cfl_max = " << fmt17(c.scheme.cfl_max) << "\n";
    os << "splitting = " << to_string(c.scheme.splitting) << "\n";
    os << "\n[diffusion]\n";
    os << "d_h = " << fmt17(c.diffusion.d_h) << "\n";
    os << "enabled = " << (c.diffusion.enabled ? "true" : "false") << "\n";
    os << "\n[adjoint]\n";
    os << "variant = " << to_string(c.adjoint.variant) << "\n";
    os << "matrix_cap = " << c.adjoint.matrix_cap << "\n";
    os << "\n[minimizer]\n";
    os << "max_iters = " << c.minimizer.max_iters << "\n";
    os << "memory = " << c.minimizer.memory << "\n";
    os << "c1 = " << fmt17(c.minimizer.c1) << "\n";
    os << "c2 = " << fmt17(c.minimizer.c2) << "\n";
    os << "grad_tol = " << fmt17(c.minimizer.grad_tol) << "\n";
    os << "cost_tol = " << fmt17(c.minimizer.cost_tol) << "\n";
    os << "max_evals_per_search = " << c.minimizer.max_evals_per_search << "\n";
    os << "\n[run]\n";
    os << "t0 = " << fmt17(c.t0) << "\n";
    os << "windows = ";
    for (size_t k = 0; k < c.windows.size(); ++k)
        os << (k ? "," : "") << fmt17(c.windows[k]);
    os << "\n";
    os << "out = " << c.out_dir << "\n";
    os << "dump_cadence = " << c.dump_cadence << "\n";
    return os.str();
}

}  // namespace

double parse_duration(const std::string& text) {
    return parse_duration_at("<arg>", 1, "duration", text);
}

Grid TwinConfig::make_grid() const {
    return Grid(nx, ny, lx / nx, ly / ny, 0.0, y0);
}

WindField TwinConfig::make_wind_field() const {
    const Grid g = make_grid();
    if (wind_kind == "from_file") {
        WindField w = load_wind_file(wind_file);
        const Grid& wg = w.grid();
        if (wg.nx != g.nx || wg.ny != g.ny || wg.dx != g.dx || wg.dy != g.dy)
            throw ConfigError("wind file grid does not match the configured grid");
        // dump headers carry no origin, so re-home the snapshots onto the
        // configured grid
        std::vector<WindSnapshot> snaps = w.snapshots();
        for (WindSnapshot& s : snaps) s.faces.grid = g;
        return WindField::from_snapshots(g, std::move(snaps));
    }
    return make_wind(wind_kind, effective_wind_params(), g);
}

std::map<std::string, double> TwinConfig::effective_wind_params() const {
    if (wind_kind != "bickley_jet") return wind_params;
    std::map<std::string, double> p{{"eps1", 0.3}, {"eps2", 0.6}, {"eps3", 0.45}};
    for (const auto& [k, v] : wind_params) p[k] = v;
    return p;
}

void TwinConfig::validate() const {
    const Grid g = make_grid();
    if (wind_kind == "from_file" && wind_file.empty())
        throw ConfigError("wind: kind from_file requires 'file'");
    const auto& allowed = allowed_wind_params(wind_kind);
    for (const auto& [k, v] : wind_params)
        if (!allowed.count(k))
            throw ConfigError("wind: unknown parameter '" + k + "' for kind " + wind_kind);
    make_plume(g, plume);  // validates geometry and factors
    if (!(scheme.cfl_max > 0.0 && scheme.cfl_max <= 1.0))
        throw ConfigError("cfl_max must be in (0, 1], got " + fmt17(scheme.cfl_max));
    if (diffusion.d_h < 0.0) throw ConfigError("d_h must be >= 0");
    if (!(minimizer.c1 > 0.0 && minimizer.c1 < minimizer.c2 && minimizer.c2 < 1.0))
        throw ConfigError("minimizer: need 0 < c1 < c2 < 1");
    if (minimizer.max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (minimizer.memory < 1) throw ConfigError("memory must be >= 1");
    if (minimizer.max_evals_per_search < 1)
        throw ConfigError("max_evals_per_search must be >= 1");
    if (minimizer.grad_tol < 0.0) throw ConfigError("grad_tol must be >= 0");
    if (minimizer.cost_tol < 0.0) throw ConfigError("cost_tol must be >= 0");
    if (windows.empty()) throw ConfigError("windows must list at least one duration");
    for (size_t k = 0; k < windows.size(); ++k) {
        if (!(windows[k] >= 0.0)) throw ConfigError("windows must be >= 0");
        if (k > 0 && !(windows[k] > windows[k - 1]))
            throw ConfigError("windows must be strictly increasing");
    }
    if (dump_cadence < 0) throw ConfigError("dump_cadence must be >= 0");
    if (out_dir.empty()) throw ConfigError("out must not be empty");
}

TwinConfig parse_config_text(const std::string& text, const std::string& origin) {
    TwinConfig c;
    c.windows.clear();  // filled from the file, defaults restored at the end
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int line = 0;
    std::set<std::string> seen;
    // wind params are name-checked after the whole file is read (the kind
    // may come later in the section), so remember where each one came from
    std::vector<std::pair<int, std::string>> wind_param_lines;
    bool diffusion_enabled_set = false;

    while (std::getline(is, raw)) {
        ++line;
        std::string s = raw;
        if (const size_t hash = s.find('#'); hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail_at(origin, line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            static const std::set<std::string> known{"grid",      "wind",    "plume",
                                                     "scheme",    "diffusion", "adjoint",
                                                     "minimizer", "run"};
            if (!known.count(section)) fail_at(origin, line, "unknown section '" + section + "'");
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos)
            fail_at(origin, line, "expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) fail_at(origin, line, "missing key before '='");
        if (section.empty()) fail_at(origin, line, "key '" + key + "' outside any [section]");
        if (!seen.insert(section + "." + key).second)
            fail_at(origin, line, "duplicate key '" + key + "' in [" + section + "]");

        if (section == "grid") {
            if (key == "nx") c.nx = parse_int(origin, line, key, value);
            else if (key == "ny") c.ny = parse_int(origin, line, key, value);
            else if (key == "lx") c.lx = parse_number(origin, line, key, value);
            else if (key == "ly") c.ly = parse_number(origin, line, key, value);
            else if (key == "y0") c.y0 = parse_number(origin, line, key, value);
            else fail_at(origin, line, "unknown key '" + key + "' in [grid]");
        } else if (section == "wind") {
            if (key == "kind") c.wind_kind = value;
            else if (key == "file") c.wind_file = value;
            else {
                c.wind_params[key] = parse_number(origin, line, key, value);
                wind_param_lines.emplace_back(line, key);
            }
        } else if (section == "plume") {
            if (key == "center_x") c.plume.center_x = parse_number(origin, line, key, value);
            else if (key == "center_y") c.plume.center_y = parse_number(origin, line, key, value);
            else if (key == "side_x") c.plume.side_x = parse_number(origin, line, key, value);
            else if (key == "side_y") c.plume.side_y = parse_number(origin, line, key, value);
            else if (key == "background") c.plume.background = parse_number(origin, line, key, value);
            else if (key == "excess_factor")
                c.plume.excess_factor = parse_number(origin, line, key, value);
            else fail_at(origin, line, "unknown key '" + key + "' in [plume]");
        } else if (section == "scheme") {
            if (key == "kind") c.scheme.scheme = scheme_from_string(value);
            else if (key == "cfl_max") c.scheme.cfl_max = parse_number(origin, line, key, value);
            else if (key == "splitting") c.scheme.splitting = splitting_from_string(value);
            else fail_at(origin, line, "unknown key '" + key + "' in [scheme]");
        } else if (section == "diffusion") {
            if (key == "d_h") c.diffusion.d_h = parse_number(origin, line, key, value);
            else if (key == "enabled") {
                c.diffusion.enabled = parse_bool(origin, line, key, value);
                diffusion_enabled_set = true;
            } else fail_at(origin, line, "unknown key '" + key + "' in [diffusion]");
        } else if (section == "adjoint") {
            if (key == "variant") c.adjoint.variant = adjoint_variant_from_string(value);
            else if (key == "matrix_cap") c.adjoint.matrix_cap = parse_int(origin, line, key, value);
            else fail_at(origin, line, "unknown key '" + key + "' in [adjoint]");
        } else if (section == "minimizer") {
            if (key == "max_iters") c.minimizer.max_iters = parse_int(origin, line, key, value);
            else if (key == "memory") c.minimizer.memory = parse_int(origin, line, key, value);
            else if (key == "c1") c.minimizer.c1 = parse_number(origin, line, key, value);
            else if (key == "c2") c.minimizer.c2 = parse_number(origin, line, key, value);
            else if (key == "grad_tol") c.minimizer.grad_tol = parse_number(origin, line, key, value);
            else if (key == "cost_tol") c.minimizer.cost_tol = parse_number(origin, line, key, value);
            else if (key == "max_evals_per_search")
                c.minimizer.max_evals_per_search = parse_int(origin, line, key, value);
            else fail_at(origin, line, "unknown key '" + key + "' in [minimizer]");
        } else if (section == "run") {
            if (key == "t0") c.t0 = parse_duration_at(origin, line, key, value);
            else if (key == "windows") {
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ','))
                    c.windows.push_back(parse_duration_at(origin, line, key, item));
                if (c.windows.empty()) fail_at(origin, line, "windows must list at least one duration");
            } else if (key == "out") c.out_dir = value;
            else if (key == "dump_cadence") c.dump_cadence = parse_int(origin, line, key, value);
            else fail_at(origin, line, "unknown key '" + key + "' in [run]");
        }
    }

    {
        const auto& allowed = allowed_wind_params(c.wind_kind);
        for (const auto& [ln, k] : wind_param_lines)
            if (!allowed.count(k))
                fail_at(origin, ln, "unknown key '" + k + "' in [wind] for kind " + c.wind_kind);
    }
    if (c.windows.empty()) c.windows = TwinConfig{}.windows;
    if (c.diffusion.d_h > 0.0 && !diffusion_enabled_set) c.diffusion.enabled = true;
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return c;
}

TwinConfig parse_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string default_config_text() { return serialize_config(TwinConfig{}); }

std::string report_csv_header() {
    return "window_hours,rel_l2_pct,com_err_pct,mass_err_pct,area_ratio_measured,"
           "area_ratio_estimated,loss_est_pct,cost_reduction_orders,iterations";
}

void write_report_csv(const std::string& path, const std::vector<DiagnosticsReport>& rows) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << report_csv_header() << "\n";
    char buf[512];
    for (const DiagnosticsReport& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                      r.window_hours, r.rel_l2_pct, r.com_err_pct, r.mass_err_pct,
                      r.area_ratio_measured, r.area_ratio_estimated, r.loss_est_pct,
                      r.cost_reduction_orders, r.iterations);
        os << buf;
    }
    if (!os) throw IoError("failed writing '" + path + "'");
}

void write_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j;
    j["version"] = m.version;
    j["config"] = m.config_echo;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["windows"] = nlohmann::json::array();
    for (const ManifestEntry& e : m.windows) {
        nlohmann::json w;
        w["window_seconds"] = e.window_seconds;
        w["ok"] = e.ok;
        w["error"] = e.error;
        w["files"] = e.files;
        w["max_cfl"] = e.max_cfl;
        w["termination"] = e.termination;
        j["windows"].push_back(std::move(w));
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << j.dump(2) << "\n";
    if (!os) throw IoError("failed writing '" + path + "'");
}

int worker_cap() {
    if (const char* env = std::getenv("CTM_THREADS")) {
        const std::string v = trim(env);
        char* end = nullptr;
        const long n = std::strtol(v.c_str(), &end, 10);
        if (v.empty() || end != v.c_str() + v.size() || n < 1)
            throw ConfigError("CTM_THREADS must be a positive integer, got '" + v + "'");
        return static_cast<int>(std::min<long>(n, 1024));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

TwinOutcome run_twin(const TwinConfig& cfg, double window, const std::string& out_dir,
                     const std::string& rel_base) {
    cfg.validate();
    if (!(window >= 0.0)) throw ConfigError("window must be >= 0");
    fs::create_directories(out_dir);
    const std::string prefix = rel_base.empty() ? "" : rel_base + "/";

    const Grid g = cfg.make_grid();
    const WindField w = cfg.make_wind_field();
    const ScalarField truth = make_plume(g, cfg.plume);
    const double t0 = cfg.t0;
    const double tf = t0 + window;

    auto [obs, log] = integrate_forward(truth, w, t0, tf, cfg.scheme, cfg.diffusion);
    const InfluenceRegion region =
        area_of_influence(obs, w, window, cfg.scheme, cfg.plume, t0, cfg.diffusion);

    CostSpec cost;
    cost.observations = obs;
    cost.background = cfg.plume.background;
    ModelSpec model;
    model.t0 = t0;
    model.tf = tf;
    model.scheme = cfg.scheme;
    model.diffusion = cfg.diffusion;
    model.adjoint = cfg.adjoint;
    InversionResult inv =
        minimize(ScalarField(g, cfg.plume.background), cost, w, model, cfg.minimizer);

    const auto footprint = plume_footprint(g, cfg.plume);
    double area_true = 0.0;
    for (auto b : footprint)
        if (b) area_true += g.cell_area();

    DiagnosticsReport r;
    r.window_hours = window / 3600.0;
    r.rel_l2_pct = rel_l2_error(inv.c0_hat, truth, cfg.plume.background);
    r.com_err_pct = center_of_mass_error(inv.c0_hat, truth, cfg.plume.background,
                                         std::max(cfg.plume.side_x, cfg.plume.side_y));
    r.mass_err_pct = total_mass_error(inv.c0_hat, truth, cfg.plume.background);
    r.area_ratio_measured = region.area / area_true;
    if (window > 0.0) {
        // stretching rate averaged over the source cells sets the effective
        // mixing strength; the broadening uses the round-trip time
        const ScalarField f = ftle_field(w, t0, window);
        double lam = 0.0;
        long cells = 0;
        for (size_t k = 0; k < footprint.size(); ++k)
            if (footprint[k]) {
                lam += f.values[k];
                ++cells;
            }
        lam = std::max(lam / static_cast<double>(cells), 0.0);
        const double width = std::sqrt(cfg.plume.side_x * cfg.plume.side_y);
        const double d_h = effective_diffusivity(lam, width, std::max(g.dx, g.dy)).d_h;
        r.area_ratio_estimated = broadening_estimate(cfg.plume, d_h, 2.0 * window);
    } else {
        r.area_ratio_estimated = 1.0;
    }
    r.loss_est_pct = loss_estimate(area_true, region.area).percent;
    r.cost_reduction_orders =
        -std::log10(std::max(inv.history.back().normalized_cost, 1e-300));
    r.iterations = inv.iterations;

    ScalarField mask_field(g, 0.0);
    for (size_t k = 0; k < region.mask.size(); ++k)
        mask_field.values[k] = region.mask[k] ? 1.0 : 0.0;

    write_field_file(out_dir + "/truth.field", truth, t0);
    write_field_file(out_dir + "/observations.field", obs, tf);
    write_field_file(out_dir + "/influence_mask.field", mask_field, t0);
    write_field_file(out_dir + "/reconstruction.field", inv.c0_hat, t0);
    write_cost_history(out_dir + "/cost_history.csv", inv);

    ManifestEntry e;
    e.window_seconds = window;
    e.ok = true;
    e.files = {prefix + "truth.field", prefix + "observations.field",
               prefix + "influence_mask.field", prefix + "reconstruction.field",
               prefix + "cost_history.csv"};
    e.max_cfl = log.max_cfl;
    e.termination = to_string(inv.termination);
    return {std::move(inv), r, std::move(e)};
}

SweepResult run_sweep(const TwinConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.version = kVersion;
    manifest.config_echo = serialize_config(cfg);
    manifest.started_at = now_utc();

    const size_t nw = cfg.windows.size();
    std::vector<ManifestEntry> entries(nw);
    std::vector<std::unique_ptr<DiagnosticsReport>> reports(nw);
    std::atomic<size_t> next{0};

    auto work = [&]() {
        for (size_t k = next.fetch_add(1); k < nw; k = next.fetch_add(1)) {
            const double window = cfg.windows[k];
            const std::string name = window_dir_name(k, window);
            try {
                TwinOutcome out = run_twin(cfg, window, out_dir + "/" + name, name);
                entries[k] = std::move(out.entry);
                reports[k] = std::make_unique<DiagnosticsReport>(out.report);
            } catch (const std::exception& ex) {
                entries[k].window_seconds = window;
                entries[k].ok = false;
                entries[k].error = ex.what();
            }
        }
    };

    const int workers = static_cast<int>(std::min<size_t>(worker_cap(), nw));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    SweepResult res;
    manifest.windows = std::move(entries);
    for (auto& r : reports)
        if (r) res.reports.push_back(*r);
    manifest.finished_at = now_utc();
    write_report_csv(out_dir + "/report.csv", res.reports);
    write_manifest(out_dir + "/manifest.json", manifest);
    res.manifest = std::move(manifest);
    return res;
}

}  // namespace ctm
