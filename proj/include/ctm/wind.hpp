#pragma once
#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ctm/grid.hpp"

namespace ctm {

// Face-staggered velocity sample (Arakawa C): u on x-normal faces,
// u[j*(nx+1)+i] for i=0..nx, v on y-normal faces, v[j*nx+i] for j=0..ny.
// Channel invariants: u(0,j) == u(nx,j) (periodic seam) and v == 0 on the
// wall rows j=0 and j=ny.
struct FaceVelocities {
    Grid grid;
    std::vector<double> u;
    std::vector<double> v;

    FaceVelocities() = default;
    explicit FaceVelocities(const Grid& g)
        : grid(g),
          u(static_cast<size_t>((g.nx + 1) * g.ny), 0.0),
          v(static_cast<size_t>(g.nx * (g.ny + 1)), 0.0) {}

    double& u_at(int i, int j) { return u[static_cast<size_t>(j * (grid.nx + 1) + i)]; }
    double u_at(int i, int j) const { return u[static_cast<size_t>(j * (grid.nx + 1) + i)]; }
    double& v_at(int i, int j) { return v[static_cast<size_t>(j * grid.nx + i)]; }
    double v_at(int i, int j) const { return v[static_cast<size_t>(j * grid.nx + i)]; }

    double max_speed() const;
    // max over cells of |(du)/dx + (dv)/dy|
    double max_divergence() const;
    // max over faces of |u|/dx, |v|/dy (the per-direction Courant rate)
    double max_courant_rate() const;

    FaceVelocities reversed() const;
};

// Analytic streamfunction psi(x, y, t); faces derived from corner
// differences so the discrete divergence telescopes to zero exactly.
struct Streamfunction {
    std::function<double(double x, double y, double t)> psi;
};

FaceVelocities winds_from_streamfunction(const Streamfunction& psi, const Grid& grid, double t);

// Meandering zonal jet with traveling-wave perturbations (chaotic mixing).
// psi = -u0*L*tanh(yt/L) + u0*L*sech^2(yt/L)*taper(yt)*sum_n eps_n*cos(k_n*x - k_n*c_n*t)
// with yt the offset from mid-channel. taper = 1 - (2*yt/Ly)^8 pins the
// perturbation to zero on the walls so v vanishes there exactly; wavenumbers
// are snapped to the nearest periodic harmonic of the domain length.
struct BickleyJetParams {
    double u0 = 62.66;                               // m/s
    double jet_width = 1.77e6;                       // m
    std::array<double, 3> eps{0.075, 0.4, 0.3};      // perturbation amplitudes
    std::array<double, 3> c_frac{0.1446, 0.205, 0.461};  // wave speeds / u0
    double earth_radius = 6.371e6;                   // m, sets nominal k_n = 2n/r_e
};

enum class WindKind { uniform, shear, bickley_jet, from_file };

struct WindSnapshot {
    double time = 0.0;
    FaceVelocities faces;
};

// Immutable wind source: either an analytic streamfunction (defined for all
// t) or a time-sorted snapshot list with linear interpolation in between.
class WindField {
  public:
    static WindField uniform(const Grid& grid, double speed);
    static WindField shear(const Grid& grid, double rate);  // u(y) = rate*(y - y_mid), v = 0
    static WindField bickley_jet(const Grid& grid, const BickleyJetParams& params = {});
    static WindField analytic(const Grid& grid, Streamfunction psi);  // custom generators
    static WindField from_snapshots(const Grid& grid, std::vector<WindSnapshot> snapshots);

    FaceVelocities sample(double t) const;

    const Grid& grid() const { return grid_; }
    WindKind kind() const { return kind_; }
    bool is_analytic() const { return kind_ != WindKind::from_file; }
    // snapshot case: valid sampling range; analytic: (-inf, +inf)
    double time_min() const;
    double time_max() const;
    const std::vector<WindSnapshot>& snapshots() const { return snapshots_; }

  private:
    WindField(const Grid& g, WindKind k) : grid_(g), kind_(k) {}
    Grid grid_;
    WindKind kind_;
    Streamfunction psi_;
    std::vector<WindSnapshot> snapshots_;
};

// Config-facing factory; params by name, e.g. {"u0", 62.66} for bickley_jet,
// {"speed", 10} for uniform, {"rate", 1e-5} for shear.
WindField make_wind(const std::string& kind, const std::map<std::string, double>& params,
                    const Grid& grid);

// Wind file: a field-dump style grid header followed by repeated records of
// `# time=<seconds>`, a (nx+1) x ny u-face block and a nx x (ny+1) v-face
// block. Every snapshot is divergence-audited on load.
WindField load_wind_file(const std::string& path);
void write_wind_file(const std::string& path, const WindField& wind, const std::vector<double>& times);

}  // namespace ctm
