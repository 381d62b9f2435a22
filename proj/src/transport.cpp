#include "ctm/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "ctm/errors.hpp"

namespace ctm {

namespace {

// van Leer monotonized central slope from the two one-sided differences.
// Returns 0 at local extrema, which is what keeps the sweeps monotone.
inline double limited_slope(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    double d = 0.5 * (a + b);
    double m = std::min(std::abs(d), 2.0 * std::min(std::abs(a), std::abs(b)));
    return std::copysign(m, d);
}

enum class SweepForm { flux, advective };

// One x sweep. flux form: out = -(dt/dx) * (F[i+1] - F[i]) with F stored once
// per face, so the row sum telescopes exactly and mass is conserved to
// rounding. advective form: out = -(dt/dx) * (u_R*(cf_R - c) - u_L*(cf_L - c)),
// which vanishes identically for uniform fields (cf == c exactly when the
// limited slope is zero), giving the constancy property of the cross split.
void sweep_x(const ScalarField& c, const FaceVelocities& w, double dt, bool second_order,
             SweepForm form, ScalarField& out) {
    const Grid& g = c.grid;
    const int nx = g.nx, ny = g.ny;
    const double r = dt / g.dx;
    std::vector<double> faceval(static_cast<size_t>(nx) + 1);
    std::vector<double> facevel(static_cast<size_t>(nx) + 1);
    std::vector<double> flux(static_cast<size_t>(nx) + 1);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double uf = w.u_at(i, j);
            const double nu = uf * r;
            const int dcell = (uf >= 0.0) ? (i + nx - 1) % nx : i;
            const double cd = c.at(dcell, j);
            double s = 0.0;
            if (second_order) {
                const int dm = (dcell + nx - 1) % nx;
                const int dp = (dcell + 1) % nx;
                s = limited_slope(cd - c.at(dm, j), c.at(dp, j) - cd);
            }
            const double cf = (uf >= 0.0) ? cd + 0.5 * s * (1.0 - nu) : cd - 0.5 * s * (1.0 + nu);
            faceval[i] = cf;
            facevel[i] = uf;
            flux[i] = uf * cf;
        }
        faceval[nx] = faceval[0];
        facevel[nx] = facevel[0];
        flux[nx] = flux[0];
        if (form == SweepForm::flux) {
            for (int i = 0; i < nx; ++i) out.at(i, j) = -r * (flux[i + 1] - flux[i]);
        } else {
            for (int i = 0; i < nx; ++i) {
                const double cij = c.at(i, j);
                out.at(i, j) = -r * (facevel[i + 1] * (faceval[i + 1] - cij) -
                                     facevel[i] * (faceval[i] - cij));
            }
        }
    }
}

// Same in y. Walls carry v = 0 so the boundary fluxes vanish; the donor index
// is clamped only to keep the (then unused) reconstruction in bounds, and the
// mirrored neighbor differences zero the slope in the first and last rows.
void sweep_y(const ScalarField& c, const FaceVelocities& w, double dt, bool second_order,
             SweepForm form, ScalarField& out) {
    const Grid& g = c.grid;
    const int nx = g.nx, ny = g.ny;
    const double r = dt / g.dy;
    std::vector<double> faceval(static_cast<size_t>(nx) * (ny + 1));
    std::vector<double> flux(static_cast<size_t>(nx) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double vf = w.v_at(i, j);
            const double nu = vf * r;
            int dcell = (vf >= 0.0) ? j - 1 : j;
            dcell = std::clamp(dcell, 0, ny - 1);
            const double cd = c.at(i, dcell);
            double s = 0.0;
            if (second_order) {
                const int dm = std::max(dcell - 1, 0);
                const int dp = std::min(dcell + 1, ny - 1);
                s = limited_slope(cd - c.at(i, dm), c.at(i, dp) - cd);
            }
            const double cf = (vf >= 0.0) ? cd + 0.5 * s * (1.0 - nu) : cd - 0.5 * s * (1.0 + nu);
            faceval[static_cast<size_t>(j) * nx + i] = cf;
            flux[static_cast<size_t>(j) * nx + i] = vf * cf;
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const size_t lo = static_cast<size_t>(j) * nx + i;
            const size_t hi = static_cast<size_t>(j + 1) * nx + i;
            if (form == SweepForm::flux) {
                out.at(i, j) = -r * (flux[hi] - flux[lo]);
            } else {
                const double cij = c.at(i, j);
                out.at(i, j) = -r * (w.v_at(i, j + 1) * (faceval[hi] - cij) -
                                     w.v_at(i, j) * (faceval[lo] - cij));
            }
        }
    }
}

void check_courant(const FaceVelocities& f, double dt, double cfl_max) {
    const double nu = f.max_courant_rate() * dt;
    if (!(nu <= cfl_max * (1.0 + 1e-12))) {
        throw PreconditionError("advect_step: Courant number " + std::to_string(nu) +
                                " exceeds limit " + std::to_string(cfl_max));
    }
}

}  // namespace

ScalarField advect_step(const ScalarField& c, const FaceVelocities& faces, double dt,
                        const SchemeSpec& spec, int step_parity) {
    if (!(c.grid == faces.grid)) throw ShapeError("advect_step: field and wind grids differ");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw PreconditionError("advect_step: bad dt");
    if (dt == 0.0) return c;
    check_courant(faces, dt, spec.cfl_max);

    const bool vl = spec.scheme == AdvectionScheme::vanleer2;
    ScalarField out(c.grid);

    if (spec.splitting == SplittingMode::cross) {
        ScalarField ax(c.grid), ay(c.grid), inner(c.grid), fx(c.grid), fy(c.grid);
        sweep_x(c, faces, dt, vl, SweepForm::advective, ax);
        sweep_y(c, faces, dt, vl, SweepForm::advective, ay);
        for (size_t k = 0; k < c.values.size(); ++k)
            inner.values[k] = c.values[k] + 0.5 * ay.values[k];
        sweep_x(inner, faces, dt, vl, SweepForm::flux, fx);
        for (size_t k = 0; k < c.values.size(); ++k)
            inner.values[k] = c.values[k] + 0.5 * ax.values[k];
        sweep_y(inner, faces, dt, vl, SweepForm::flux, fy);
        for (size_t k = 0; k < c.values.size(); ++k)
            out.values[k] = c.values[k] + (fx.values[k] + fy.values[k]);
        return out;
    }

    // alternate: sequential conservative sweeps, order flipped by parity
    ScalarField inc(c.grid);
    ScalarField cur = c;
    const bool x_first = (step_parity % 2) == 0;
    for (int pass = 0; pass < 2; ++pass) {
        const bool do_x = (pass == 0) == x_first;
        if (do_x)
            sweep_x(cur, faces, dt, vl, SweepForm::flux, inc);
        else
            sweep_y(cur, faces, dt, vl, SweepForm::flux, inc);
        for (size_t k = 0; k < cur.values.size(); ++k) cur.values[k] += inc.values[k];
    }
    return cur;
}

ScalarField diffuse_step(const ScalarField& c, const DiffusionSpec& d, double dt) {
    if (!d.enabled || d.d_h == 0.0) return c;
    if (d.d_h < 0.0) throw PreconditionError("diffuse_step: negative diffusivity");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw PreconditionError("diffuse_step: bad dt");
    const Grid& g = c.grid;
    const double k2 = 1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy);
    const double stab = dt * d.d_h * k2;
    if (!(stab <= 0.5 * (1.0 + 1e-12))) {
        throw PreconditionError("diffuse_step: dt*d_h*(1/dx^2+1/dy^2) = " + std::to_string(stab) +
                                " exceeds 1/2");
    }
    const int nx = g.nx, ny = g.ny;
    ScalarField out(g);
    std::vector<double> fx(static_cast<size_t>(nx) + 1);
    // horizontal fluxes, then vertical, flux form throughout so mass telescopes
    ScalarField xpart(g);
    const double ax = d.d_h / g.dx;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int im = (i + nx - 1) % nx;
            fx[i] = -ax * (c.at(i, j) - c.at(im, j));
        }
        fx[nx] = fx[0];
        for (int i = 0; i < nx; ++i) xpart.at(i, j) = -(dt / g.dx) * (fx[i + 1] - fx[i]);
    }
    const double ay = d.d_h / g.dy;
    std::vector<double> fy(static_cast<size_t>(nx) * (ny + 1), 0.0);
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            fy[static_cast<size_t>(j) * nx + i] = -ay * (c.at(i, j) - c.at(i, j - 1));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double div = (fy[static_cast<size_t>(j + 1) * nx + i] -
                                fy[static_cast<size_t>(j) * nx + i]) / g.dy;
            out.at(i, j) = c.at(i, j) + xpart.at(i, j) - dt * div;
        }
    }
    return out;
}

StepSchedule plan_schedule(const WindField& w, double t0, double tf, const SchemeSpec& spec,
                           const DiffusionSpec& d) {
    if (!(tf >= t0)) throw PreconditionError("plan_schedule: tf < t0");
    if (t0 < w.time_min() || tf > w.time_max())
        throw TimeRangeError("plan_schedule: [" + std::to_string(t0) + ", " + std::to_string(tf) +
                             "] outside wind range [" + std::to_string(w.time_min()) + ", " +
                             std::to_string(w.time_max()) + "]");
    StepSchedule sched;
    sched.t0 = t0;
    sched.tf = tf;
    if (tf == t0) return sched;

    double dt_diff = std::numeric_limits<double>::infinity();
    if (d.enabled && d.d_h > 0.0) {
        const Grid& g = w.grid();
        dt_diff = 0.45 / (d.d_h * (1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy)));
    }

    double t = t0;
    const long max_steps = 20'000'000;
    while (t < tf) {
        const FaceVelocities start = w.sample(t);
        const double rate = start.max_courant_rate();
        double dt = tf - t;
        if (rate > 0.0) dt = std::min(dt, 0.95 * spec.cfl_max / rate);
        dt = std::min(dt, dt_diff);

        bool ok = false;
        for (int tries = 0; tries < 60; ++tries) {
            const FaceVelocities mid = w.sample(t + 0.5 * dt);
            if (mid.max_courant_rate() * dt <= spec.cfl_max) {
                ok = true;
                break;
            }
            dt *= 0.5;
        }
        if (!ok) throw PreconditionError("plan_schedule: could not satisfy Courant bound at t = " +
                                         std::to_string(t));
        const bool last = dt >= tf - t;
        if (last) dt = tf - t;
        sched.steps.push_back({t, dt});
        if (static_cast<long>(sched.steps.size()) > max_steps)
            throw PreconditionError("plan_schedule: step count exploded, check wind speeds");
        t = last ? tf : t + dt;
    }
    return sched;
}

std::pair<ScalarField, TransportLog> integrate_forward(const ScalarField& c0, const WindField& w,
                                                       double t0, double tf,
                                                       const SchemeSpec& spec,
                                                       const DiffusionSpec& d,
                                                       std::vector<ScalarField>* trajectory) {
    if (!(c0.grid == w.grid())) throw ShapeError("integrate_forward: field and wind grids differ");
    const auto t_start = std::chrono::steady_clock::now();

    TransportLog log;
    log.schedule = plan_schedule(w, t0, tf, spec, d);
    log.mass_initial = field_integral(c0);
    const double mass_scale = std::max(std::abs(log.mass_initial), 1e-300);

    ScalarField c = c0;
    double mass_prev = log.mass_initial;
    int parity = 0;
    for (const SubStep& s : log.schedule.steps) {
        const FaceVelocities faces = w.sample(s.t + 0.5 * s.dt);
        if (trajectory) trajectory->push_back(c);
        c = advect_step(c, faces, s.dt, spec, parity);
        c = diffuse_step(c, d, s.dt);
        const double mass_now = field_integral(c);
        log.max_step_mass_drift =
            std::max(log.max_step_mass_drift, std::abs(mass_now - mass_prev) / mass_scale);
        mass_prev = mass_now;
        log.max_cfl = std::max(log.max_cfl, faces.max_courant_rate() * s.dt);
        ++parity;
    }
    log.steps = static_cast<long>(log.schedule.steps.size());
    log.mass_final = mass_prev;
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(c), log};
}

AdvectionScheme scheme_from_string(const std::string& s) {
    if (s == "upwind1") return AdvectionScheme::upwind1;
    if (s == "vanleer2") return AdvectionScheme::vanleer2;
    throw ConfigError("unknown advection scheme '" + s + "' (expected upwind1 or vanleer2)");
}

SplittingMode splitting_from_string(const std::string& s) {
    if (s == "cross") return SplittingMode::cross;
    if (s == "alternate") return SplittingMode::alternate;
    throw ConfigError("unknown splitting mode '" + s + "' (expected cross or alternate)");
}

std::string to_string(AdvectionScheme s) {
    return s == AdvectionScheme::upwind1 ? "upwind1" : "vanleer2";
}

std::string to_string(SplittingMode s) {
    return s == SplittingMode::cross ? "cross" : "alternate";
}

}  // namespace ctm
