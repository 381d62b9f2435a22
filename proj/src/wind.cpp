#include "ctm/wind.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ctm {

double FaceVelocities::max_speed() const {
    double m = 0.0;
    for (double s : u) m = std::max(m, std::abs(s));
    for (double s : v) m = std::max(m, std::abs(s));
    return m;
}

double FaceVelocities::max_divergence() const {
    double m = 0.0;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const double div = (u_at(i + 1, j) - u_at(i, j)) / grid.dx +
                               (v_at(i, j + 1) - v_at(i, j)) / grid.dy;
            m = std::max(m, std::abs(div));
        }
    return m;
}

double FaceVelocities::max_courant_rate() const {
    double m = 0.0;
    for (double s : u) m = std::max(m, std::abs(s) / grid.dx);
    for (double s : v) m = std::max(m, std::abs(s) / grid.dy);
    return m;
}

FaceVelocities FaceVelocities::reversed() const {
    FaceVelocities r(grid);
    for (size_t k = 0; k < u.size(); ++k) r.u[k] = -u[k];
    for (size_t k = 0; k < v.size(); ++k) r.v[k] = -v[k];
    return r;
}

FaceVelocities winds_from_streamfunction(const Streamfunction& psi, const Grid& grid, double t) {
    // psi at cell corners (i, j) -> (x0 + i dx, y0 + j dy). The last corner
    // column reuses column 0 so the periodic seam is bit-identical for any
    // generator, not just ones whose psi(x0 + Lx) rounds to psi(x0).
    const int nxc = grid.nx + 1;
    std::vector<double> corners(static_cast<size_t>(nxc * (grid.ny + 1)));
    for (int j = 0; j <= grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i)
            corners[static_cast<size_t>(j * nxc + i)] =
                psi.psi(grid.x0 + i * grid.dx, grid.y0 + j * grid.dy, t);
        corners[static_cast<size_t>(j * nxc + grid.nx)] = corners[static_cast<size_t>(j * nxc)];
    }

    FaceVelocities f(grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i)
            f.u_at(i, j) = -(corners[static_cast<size_t>((j + 1) * nxc + i)] -
                             corners[static_cast<size_t>(j * nxc + i)]) / grid.dy;
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            f.v_at(i, j) = (corners[static_cast<size_t>(j * nxc + i + 1)] -
                            corners[static_cast<size_t>(j * nxc + i)]) / grid.dx;
    return f;
}

WindField WindField::uniform(const Grid& grid, double speed) {
    WindField w(grid, WindKind::uniform);
    const double y0 = grid.y0;
    w.psi_.psi = [speed, y0](double, double y, double) { return -speed * (y - y0); };
    return w;
}

WindField WindField::shear(const Grid& grid, double rate) {
    WindField w(grid, WindKind::shear);
    const double yc = grid.y0 + 0.5 * grid.ly();
    w.psi_.psi = [rate, yc](double, double y, double) {
        const double yt = y - yc;
        return -0.5 * rate * yt * yt;
    };
    return w;
}

WindField WindField::bickley_jet(const Grid& grid, const BickleyJetParams& p) {
    if (!(p.u0 > 0.0) || !(p.jet_width > 0.0))
        throw ConfigError("bickley_jet: u0 and jet_width must be > 0");
    const double yc = grid.y0 + 0.5 * grid.ly();
    const double half_width = 0.5 * grid.ly();
    const double lx = grid.lx();
    const double k_unit = 2.0 * M_PI / lx;
    std::array<double, 3> k{};
    for (int n = 0; n < 3; ++n) {
        // snap nominal 2(n+1)/r_e to the nearest periodic harmonic
        const double nominal = 2.0 * (n + 1) / p.earth_radius;
        const double harmonics = std::max(1.0, std::round(nominal / k_unit));
        k[n] = harmonics * k_unit;
    }
    const double u0 = p.u0, L = p.jet_width;
    const auto eps = p.eps;
    std::array<double, 3> c{};
    for (int n = 0; n < 3; ++n) c[n] = p.c_frac[n] * u0;
    WindField w(grid, WindKind::bickley_jet);
    w.psi_.psi = [u0, L, eps, c, k, yc, half_width](double x, double y, double t) {
        const double yt = y - yc;
        const double sech = 1.0 / std::cosh(yt / L);
        const double r = yt / half_width;
        const double r4 = r * r * r * r;
        const double taper = 1.0 - r4 * r4;  // zero on the walls
        double waves = 0.0;
        for (int n = 0; n < 3; ++n) waves += eps[n] * std::cos(k[n] * (x - c[n] * t));
        return -u0 * L * std::tanh(yt / L) + u0 * L * sech * sech * taper * waves;
    };
    return w;
}

WindField WindField::analytic(const Grid& grid, Streamfunction psi) {
    WindField w(grid, WindKind::bickley_jet);
    w.psi_ = std::move(psi);
    return w;
}

namespace {

void validate_snapshot(const FaceVelocities& f, int index) {
    const Grid& g = f.grid;
    const double speed = f.max_speed();
    const double tol = 1e-12 * std::max(speed / std::min(g.dx, g.dy), 1e-300);
    if (f.max_divergence() > tol)
        throw IoError("wind snapshot " + std::to_string(index) + ": discrete divergence " +
                      std::to_string(f.max_divergence()) + " exceeds tolerance");
    for (int j = 0; j < g.ny; ++j)
        if (f.u_at(0, j) != f.u_at(g.nx, j))
            throw IoError("wind snapshot " + std::to_string(index) +
                          ": periodic seam mismatch in u at row " + std::to_string(j));
    for (int i = 0; i < g.nx; ++i)
        if (f.v_at(i, 0) != 0.0 || f.v_at(i, g.ny) != 0.0)
            throw IoError("wind snapshot " + std::to_string(index) +
                          ": nonzero v on a wall face at column " + std::to_string(i));
}

}  // namespace

WindField WindField::from_snapshots(const Grid& grid, std::vector<WindSnapshot> snapshots) {
    if (snapshots.empty()) throw ConfigError("wind snapshots: empty list");
    for (size_t k = 0; k < snapshots.size(); ++k) {
        if (snapshots[k].faces.grid != grid)
            throw ShapeError("wind snapshot " + std::to_string(k) + ": grid mismatch");
        if (k > 0 && !(snapshots[k].time > snapshots[k - 1].time))
            throw IoError("wind snapshots: times must be strictly increasing (snapshot " +
                          std::to_string(k) + ")");
        validate_snapshot(snapshots[k].faces, static_cast<int>(k));
    }
    WindField w(grid, WindKind::from_file);
    w.snapshots_ = std::move(snapshots);
    return w;
}

double WindField::time_min() const {
    return is_analytic() ? -std::numeric_limits<double>::infinity() : snapshots_.front().time;
}

double WindField::time_max() const {
    return is_analytic() ? std::numeric_limits<double>::infinity() : snapshots_.back().time;
}

FaceVelocities WindField::sample(double t) const {
    if (is_analytic()) return winds_from_streamfunction(psi_, grid_, t);
    if (t < time_min() || t > time_max())
        throw TimeRangeError("wind sample: t=" + std::to_string(t) + " outside snapshot range [" +
                             std::to_string(time_min()) + ", " + std::to_string(time_max()) + "]");
    // bracketing snapshots; linear interpolation preserves divergence-freeness
    auto it = std::lower_bound(snapshots_.begin(), snapshots_.end(), t,
                               [](const WindSnapshot& s, double tt) { return s.time < tt; });
    if (it == snapshots_.begin()) return it->faces;
    if (it == snapshots_.end() || it->time == t) return (it == snapshots_.end() ? snapshots_.back() : *it).faces;
    const WindSnapshot& hi = *it;
    const WindSnapshot& lo = *(it - 1);
    const double w = (t - lo.time) / (hi.time - lo.time);
    FaceVelocities f(grid_);
    for (size_t k = 0; k < f.u.size(); ++k) f.u[k] = lo.faces.u[k] + w * (hi.faces.u[k] - lo.faces.u[k]);
    for (size_t k = 0; k < f.v.size(); ++k) f.v[k] = lo.faces.v[k] + w * (hi.faces.v[k] - lo.faces.v[k]);
    return f;
}

WindField make_wind(const std::string& kind, const std::map<std::string, double>& params,
                    const Grid& grid) {
    auto get = [&params](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (kind == "uniform") return WindField::uniform(grid, get("speed", 10.0));
    if (kind == "shear") return WindField::shear(grid, get("rate", 1e-5));
    if (kind == "bickley_jet") {
        BickleyJetParams p;
        p.u0 = get("u0", p.u0);
        p.jet_width = get("jet_width", p.jet_width);
        p.eps[0] = get("eps1", p.eps[0]);
        p.eps[1] = get("eps2", p.eps[1]);
        p.eps[2] = get("eps3", p.eps[2]);
        p.c_frac[0] = get("c1", p.c_frac[0]);
        p.c_frac[1] = get("c2", p.c_frac[1]);
        p.c_frac[2] = get("c3", p.c_frac[2]);
        return WindField::bickley_jet(grid, p);
    }
    throw ConfigError("wind: unknown kind '" + kind + "' (expected uniform|shear|bickley_jet|from_file)");
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_kv_line(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("wind file: missing header '# " + key + "='");
    const std::string prefix = "# " + key + "=";
    if (line.rfind(prefix, 0) != 0)
        throw IoError("wind file: expected '# " + key + "=', got '" + line + "'");
    try {
        return std::stod(line.substr(prefix.size()));
    } catch (const std::exception&) {
        throw IoError("wind file: cannot parse header '" + line + "'");
    }
}

}  // namespace

void write_wind_file(const std::string& path, const WindField& wind,
                     const std::vector<double>& times) {
    if (times.empty()) throw ConfigError("write_wind_file: need at least one sample time");
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    const Grid& g = wind.grid();
    os << "# nx=" << g.nx << "\n# ny=" << g.ny << "\n# dx=" << fmt17(g.dx) << "\n# dy="
       << fmt17(g.dy) << "\n";
    for (double t : times) {
        const FaceVelocities f = wind.sample(t);
        os << "# time=" << fmt17(t) << "\n";
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i <= g.nx; ++i) {
                if (i) os << ' ';
                os << fmt17(f.u_at(i, j));
            }
            os << '\n';
        }
        for (int j = 0; j <= g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                if (i) os << ' ';
                os << fmt17(f.v_at(i, j));
            }
            os << '\n';
        }
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

WindField load_wind_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open wind file '" + path + "'");
    const int nx = static_cast<int>(parse_kv_line(is, "nx"));
    const int ny = static_cast<int>(parse_kv_line(is, "ny"));
    const double dx = parse_kv_line(is, "dx");
    const double dy = parse_kv_line(is, "dy");
    Grid g(nx, ny, dx, dy);
    std::vector<WindSnapshot> snaps;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::string prefix = "# time=";
        if (line.rfind(prefix, 0) != 0)
            throw IoError("wind file: expected '# time=' record, got '" + line + "'");
        WindSnapshot s;
        try {
            s.time = std::stod(line.substr(prefix.size()));
        } catch (const std::exception&) {
            throw IoError("wind file: cannot parse '" + line + "'");
        }
        s.faces = FaceVelocities(g);
        for (double& val : s.faces.u)
            if (!(is >> val)) throw IoError("wind file: truncated u block in snapshot " +
                                            std::to_string(snaps.size()));
        for (double& val : s.faces.v)
            if (!(is >> val)) throw IoError("wind file: truncated v block in snapshot " +
                                            std::to_string(snaps.size()));
        is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
        snaps.push_back(std::move(s));
    }
    return WindField::from_snapshots(g, std::move(snaps));
}

}  // namespace ctm
