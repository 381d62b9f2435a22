#include <doctest.h>

#include <cmath>
#include <random>

#include "ctm/errors.hpp"
#include "ctm/transport.hpp"
#include "ctm/wind.hpp"

using namespace ctm;

namespace {

Grid channel_grid() { return Grid(64, 32, 3.125e5, 1.875e5, 0.0, -3.0e6); }

ScalarField random_nonneg(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    ScalarField c(g);
    for (auto& v : c.values) v = dist(rng);
    return c;
}

}  // namespace

TEST_CASE("uniform fields are fixed points of advect_step") {
    Grid g = channel_grid();
    SchemeSpec spec;
    const double value = 3.7;
    for (const char* kind : {"uniform", "shear", "bickley"}) {
        WindField w = kind[0] == 'u'   ? WindField::uniform(g, 10.0)
                      : kind[0] == 's' ? WindField::shear(g, 1e-5)
                                       : WindField::bickley_jet(g);
        for (double t : {0.0, 2.5e5}) {
            FaceVelocities f = w.sample(t);
            const double dt = 0.9 * spec.cfl_max / std::max(f.max_courant_rate(), 1e-30);
            ScalarField c(g, value);
            for (AdvectionScheme s : {AdvectionScheme::upwind1, AdvectionScheme::vanleer2}) {
                spec.scheme = s;
                ScalarField out = advect_step(c, f, dt, spec);
                for (double v : out.values) CHECK(std::abs(v - value) <= 1e-14 * value);
            }
        }
    }
}

TEST_CASE("donor cell spike splits as 1-nu / nu") {
    Grid g(16, 4, 1.0, 1.0);
    WindField w = WindField::uniform(g, 1.0);
    FaceVelocities f = w.sample(0.0);
    const double nu = 0.5;
    SchemeSpec spec;
    spec.scheme = AdvectionScheme::upwind1;
    ScalarField c(g);
    c.at(8, 2) = 1.0;
    ScalarField out = advect_step(c, f, nu, spec);
    CHECK(out.at(8, 2) == doctest::Approx(1.0 - nu).epsilon(1e-15));
    CHECK(out.at(9, 2) == doctest::Approx(nu).epsilon(1e-15));
    CHECK(out.at(7, 2) == 0.0);
    CHECK(out.at(8, 1) == 0.0);
    double sum = 0.0;
    for (double v : out.values) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

namespace {

// advect a smooth bump one full circuit in uniform flow, return L2 error
double circuit_error(int nx, AdvectionScheme scheme) {
    Grid g(nx, 4, 1.0 * 64 / nx, 1.0);
    WindField w = WindField::uniform(g, 1.0);
    FaceVelocities f = w.sample(0.0);
    SchemeSpec spec;
    spec.scheme = scheme;
    const double nu = 0.5;
    const double dt = nu * g.dx;
    ScalarField c(g);
    auto bump = [&](double x) {
        const double s = 8.0;
        const double d = x - 32.0;
        return std::exp(-d * d / (2.0 * s * s));
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) c.at(i, j) = bump(g.cell_center_x(i));
    const int steps = static_cast<int>(std::lround(g.lx() / (f.u_at(0, 0) * dt)));
    ScalarField cur = c;
    for (int k = 0; k < steps; ++k) cur = advect_step(cur, f, dt, spec, k);
    double err2 = 0.0;
    for (int k = 0; k < g.ncells(); ++k) {
        const double d = cur.values[k] - c.values[k];
        err2 += d * d * g.cell_area();
    }
    return std::sqrt(err2);
}

}  // namespace

TEST_CASE("vanleer2 beats upwind1 on a smooth circuit") {
    const double e_up = circuit_error(64, AdvectionScheme::upwind1);
    const double e_vl = circuit_error(64, AdvectionScheme::vanleer2);
    CHECK(e_vl < 0.5 * e_up);
}

TEST_CASE("refinement convergence rates by scheme") {
    const double up_c = circuit_error(64, AdvectionScheme::upwind1);
    const double up_f = circuit_error(128, AdvectionScheme::upwind1);
    const double vl_c = circuit_error(64, AdvectionScheme::vanleer2);
    const double vl_f = circuit_error(128, AdvectionScheme::vanleer2);
    CHECK(up_c / up_f == doctest::Approx(2.0).epsilon(0.25));
    CHECK(vl_c / vl_f >= 3.0);
}

TEST_CASE("advection conserves mass step by step in jet flow") {
    Grid g = channel_grid();
    WindField w = WindField::bickley_jet(g);
    ScalarField c = random_nonneg(g, 17);
    SchemeSpec spec;
    double t = 0.0;
    double mass0 = field_integral(c);
    for (int k = 0; k < 200; ++k) {
        FaceVelocities f = w.sample(t);
        const double dt = 0.95 * spec.cfl_max / f.max_courant_rate();
        c = advect_step(c, f, dt, spec, k);
        t += dt;
        CHECK(std::abs(field_integral(c) - mass0) <= 1e-12 * std::abs(mass0));
    }
    CHECK(c.min_value() >= 0.0);
}

TEST_CASE("positivity on random nonnegative fields") {
    Grid g = channel_grid();
    WindField w = WindField::bickley_jet(g);
    SchemeSpec spec;
    for (unsigned seed = 0; seed < 20; ++seed) {
        ScalarField c = random_nonneg(g, seed);
        FaceVelocities f = w.sample(seed * 1.0e4);
        const double dt = 0.98 * spec.cfl_max / f.max_courant_rate();
        ScalarField out = advect_step(c, f, dt, spec);
        CHECK(out.min_value() >= 0.0);
        CHECK(out.all_finite());
    }
}

TEST_CASE("single 1d sweep introduces no new extrema") {
    Grid g(32, 8, 1.0, 1.0);
    WindField w = WindField::uniform(g, 1.0);
    FaceVelocities f = w.sample(0.0);
    SchemeSpec spec;
    ScalarField c = random_nonneg(g, 5);
    ScalarField out = advect_step(c, f, 0.8, spec);
    CHECK(out.max_value() <= c.max_value() + 1e-14);
    CHECK(out.min_value() >= c.min_value() - 1e-14);
}

TEST_CASE("cfl violations are hard errors") {
    Grid g(16, 4, 1.0, 1.0);
    WindField w = WindField::uniform(g, 1.0);
    SchemeSpec spec;
    CHECK_THROWS_AS(advect_step(ScalarField(g, 1.0), w.sample(0.0), 0.81, spec), PreconditionError);
    CHECK_NOTHROW(advect_step(ScalarField(g, 1.0), w.sample(0.0), 0.8, spec));
}

TEST_CASE("diffuse_step identity cases") {
    Grid g(8, 8, 1.0, 1.0);
    ScalarField c = random_nonneg(g, 9);
    DiffusionSpec off;
    ScalarField out = diffuse_step(c, off, 100.0);
    CHECK(out.values == c.values);

    DiffusionSpec on;
    on.enabled = true;
    on.d_h = 0.1;
    ScalarField flat(g, 2.5);
    ScalarField still = diffuse_step(flat, on, 1.0);
    for (double v : still.values) CHECK(v == 2.5);
}

TEST_CASE("diffusion spike matches the 5 point stencil") {
    Grid g(5, 5, 1.0, 1.0);
    ScalarField c(g);
    c.at(2, 2) = 1.0;
    DiffusionSpec d;
    d.enabled = true;
    d.d_h = 0.1;
    ScalarField out = diffuse_step(c, d, 1.0);
    CHECK(out.at(2, 2) == doctest::Approx(1.0 - 4.0 * 0.1).epsilon(1e-15));
    CHECK(out.at(1, 2) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(out.at(3, 2) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(out.at(2, 1) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(out.at(2, 3) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(out.at(1, 1) == 0.0);
    CHECK(field_integral(out) == doctest::Approx(field_integral(c)).epsilon(1e-14));
}

TEST_CASE("diffusion stability bound is enforced") {
    Grid g(8, 8, 1.0, 1.0);
    DiffusionSpec d;
    d.enabled = true;
    d.d_h = 1.0;
    CHECK_THROWS_AS(diffuse_step(ScalarField(g, 1.0), d, 0.3), PreconditionError);
    CHECK_NOTHROW(diffuse_step(ScalarField(g, 1.0), d, 0.25));
}

TEST_CASE("diffusion obeys the max principle") {
    Grid g(16, 16, 2.0, 3.0);
    ScalarField c = random_nonneg(g, 21);
    DiffusionSpec d;
    d.enabled = true;
    d.d_h = 0.5;
    ScalarField out = diffuse_step(c, d, 1.0);
    CHECK(out.max_value() <= c.max_value() + 1e-14);
    CHECK(out.min_value() >= c.min_value() - 1e-14);
}

TEST_CASE("integrate_forward with zero span returns the input") {
    Grid g = channel_grid();
    WindField w = WindField::bickley_jet(g);
    ScalarField c = random_nonneg(g, 2);
    auto [out, log] = integrate_forward(c, w, 5.0, 5.0, SchemeSpec{});
    CHECK(out.values == c.values);
    CHECK(log.steps == 0);
}

TEST_CASE("uniform flow translates the plume") {
    Grid g(64, 16, 1.0e3, 1.0e3);
    WindField w = WindField::uniform(g, 10.0);
    PlumeSpec p;
    p.center_x = 16.0e3;
    p.center_y = 8.0e3;
    p.side_x = 6.0e3;
    p.side_y = 6.0e3;
    ScalarField c0 = make_plume(g, p);
    const double T = 2000.0;  // 20 km, 20 cells
    auto [cf, log] = integrate_forward(c0, w, 0.0, T, SchemeSpec{});

    auto com_x = [&](const ScalarField& c) {
        double m = 0.0, mx = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double e = std::max(c.at(i, j) - 1.0, 0.0);
                m += e;
                mx += e * g.cell_center_x(i);
            }
        return mx / m;
    };
    CHECK(std::abs(com_x(cf) - (com_x(c0) + 10.0 * T)) <= g.dx);
    CHECK(log.max_cfl <= SchemeSpec{}.cfl_max + 1e-12);
    CHECK(log.max_step_mass_drift <= 1e-12);
    CHECK(std::abs(log.mass_final - log.mass_initial) <= 1e-12 * log.mass_initial);
}

TEST_CASE("integrate_forward is bit reproducible") {
    Grid g = channel_grid();
    WindField w = WindField::bickley_jet(g);
    ScalarField c = random_nonneg(g, 31);
    auto [a, la] = integrate_forward(c, w, 0.0, 2.0e5, SchemeSpec{});
    auto [b, lb] = integrate_forward(c, w, 0.0, 2.0e5, SchemeSpec{});
    CHECK(a.values == b.values);
    CHECK(la.steps == lb.steps);
}

TEST_CASE("long jet integration conserves mass") {
    Grid g = channel_grid();
    WindField w = WindField::bickley_jet(g);
    PlumeSpec p;
    p.center_x = 0.5 * g.lx();
    p.center_y = 1.2e6;
    p.side_x = 1.33e6;
    p.side_y = 1.68e6;
    ScalarField c0 = make_plume(g, p);
    auto [cf, log] = integrate_forward(c0, w, 0.0, 3.0e6, SchemeSpec{});
    CHECK(log.steps >= 500);
    CHECK(std::abs(log.mass_final - log.mass_initial) <= 1e-12 * log.mass_initial);
    CHECK(log.max_step_mass_drift <= 1e-12);
    CHECK(cf.min_value() >= 0.0);
}

TEST_CASE("schedules cover the interval and respect bounds") {
    Grid g = channel_grid();
    WindField w = WindField::bickley_jet(g);
    SchemeSpec spec;
    DiffusionSpec d;
    d.enabled = true;
    d.d_h = 3.6e6;
    StepSchedule s = plan_schedule(w, 1000.0, 9.0e5, spec, d);
    double t = 1000.0;
    const double k2 = 1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy);
    for (const SubStep& st : s.steps) {
        CHECK(st.t == doctest::Approx(t).epsilon(1e-12));
        CHECK(st.dt > 0.0);
        const FaceVelocities mid = w.sample(st.t + 0.5 * st.dt);
        CHECK(mid.max_courant_rate() * st.dt <= spec.cfl_max * (1 + 1e-12));
        CHECK(st.dt * d.d_h * k2 <= 0.5 * (1 + 1e-12));
        t += st.dt;
    }
    CHECK(t == doctest::Approx(9.0e5).epsilon(1e-12));
}

TEST_CASE("snapshot winds enforce their time range") {
    Grid g(8, 8, 1.0e5, 1.0e5);
    WindSnapshot s0{0.0, WindField::uniform(g, 5.0).sample(0.0)};
    WindSnapshot s1{100.0, WindField::uniform(g, 5.0).sample(0.0)};
    WindField w = WindField::from_snapshots(g, {s0, s1});
    ScalarField c(g, 1.0);
    CHECK_THROWS_AS(integrate_forward(c, w, 0.0, 200.0, SchemeSpec{}), TimeRangeError);
}

TEST_CASE("alternate splitting still conserves mass") {
    Grid g = channel_grid();
    WindField w = WindField::bickley_jet(g);
    SchemeSpec spec;
    spec.splitting = SplittingMode::alternate;
    ScalarField c = random_nonneg(g, 13);
    const double mass0 = field_integral(c);
    FaceVelocities f = w.sample(0.0);
    const double dt = 0.9 * spec.cfl_max / f.max_courant_rate();
    for (int k = 0; k < 10; ++k) c = advect_step(c, f, dt, spec, k);
    CHECK(std::abs(field_integral(c) - mass0) <= 1e-12 * std::abs(mass0));
}
