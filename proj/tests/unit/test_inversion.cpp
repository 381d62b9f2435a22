#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctm/errors.hpp"
#include "ctm/inversion.hpp"

using namespace ctm;

namespace {

Grid small_channel() { return Grid(8, 8, 2.5e6, 7.5e5, 0.0, -3.0e6); }
Grid desk_channel() { return Grid(64, 32, 3.125e5, 1.875e5, 0.0, -3.0e6); }

PlumeSpec desk_plume(const Grid& g) {
    PlumeSpec p;
    p.center_x = 0.5 * g.lx();
    p.center_y = 1.2e6;
    p.side_x = 1.33e6;
    p.side_y = 1.68e6;
    return p;
}

}  // namespace

TEST_CASE("cost is zero at the truth") {
    Grid g = small_channel();
    WindField w = WindField::bickley_jet(g);
    PlumeSpec p = desk_plume(g);
    p.side_x = 3.0 * g.dx;
    p.side_y = 3.0 * g.dy;
    p.center_y = 0.0;
    ScalarField truth = make_plume(g, p);
    ModelSpec model;
    model.tf = 1.0e5;
    auto [obs, log] = integrate_forward(truth, w, model.t0, model.tf, model.scheme, model.diffusion);
    CostSpec cost{obs, 1.0, {}};
    auto [j, grad] = cost_and_gradient(truth, cost, w, model);
    CHECK(j == 0.0);
    for (double v : grad.values) CHECK(v == 0.0);
}

TEST_CASE("zero window cost is the plain misfit") {
    Grid g = small_channel();
    WindField w = WindField::uniform(g, 10.0);
    ScalarField y(g, 1.0);
    y.at(3, 3) = 2.0;
    ScalarField c0(g, 1.0);
    c0.at(5, 5) = 1.5;
    ModelSpec model;  // tf == t0 == 0
    CostSpec cost{y, 1.0, {}};
    auto [j, grad] = cost_and_gradient(c0, cost, w, model);
    ScalarField r(g);
    for (int k = 0; k < g.ncells(); ++k) r.values[k] = c0.values[k] - y.values[k];
    CHECK(j == doctest::Approx(0.5 * inner_product(r, r)).epsilon(1e-14));
    for (int k = 0; k < g.ncells(); ++k) CHECK(grad.values[k] == r.values[k]);
}

TEST_CASE("cost gradient matches finite differences through the api") {
    Grid g = small_channel();
    WindField w = WindField::bickley_jet(g);
    ModelSpec model;
    model.tf = 8.0e4;
    model.scheme.scheme = AdvectionScheme::upwind1;
    model.adjoint.variant = AdjointVariant::discrete_transpose;

    PlumeSpec p = desk_plume(g);
    p.side_x = 3.0 * g.dx;
    p.side_y = 3.0 * g.dy;
    p.center_y = 0.0;
    ScalarField truth = make_plume(g, p);
    auto [obs, lg] = integrate_forward(truth, w, model.t0, model.tf, model.scheme, model.diffusion);
    CostSpec cost{obs, 1.0, {}};

    ScalarField c0(g, 1.0);
    auto [j, grad] = cost_and_gradient(c0, cost, w, model);
    const double h = 1e-6;
    double worst = 0.0, scale = 0.0;
    for (int k = 0; k < g.ncells(); ++k) {
        ScalarField cp = c0, cm = c0;
        cp.values[k] += h;
        cm.values[k] -= h;
        const double jp = cost_and_gradient(cp, cost, w, model).first;
        const double jm = cost_and_gradient(cm, cost, w, model).first;
        const double fd = (jp - jm) / (2.0 * h);
        worst = std::max(worst, std::abs(grad.values[k] * g.cell_area() - fd));
        scale = std::max(scale, std::abs(fd));
    }
    CHECK(worst <= 1e-6 * scale);
}

TEST_CASE("identity quadratic minimizes in one step") {
    Grid g = small_channel();
    WindField w = WindField::uniform(g, 10.0);
    ScalarField y(g, 1.0);
    y.at(2, 6) = 3.0;
    y.at(3, 6) = 2.2;
    ModelSpec model;  // zero window: J = 1/2 |c0 - y|^2
    CostSpec cost{y, 1.0, {}};
    MinimizerSpec spec;
    InversionResult res = minimize(ScalarField(g, 1.0), cost, w, model, spec);
    CHECK(res.iterations <= 3);
    CHECK(rel_l2_error(res.c0_hat, y, 1.0) <= 1e-8);
    CHECK(res.termination == Termination::grad_tol);
}

TEST_CASE("masked quadratic leaves unobserved cells alone") {
    Grid g = small_channel();
    WindField w = WindField::uniform(g, 10.0);
    ScalarField y(g, 1.0);
    y.at(2, 2) = 4.0;
    y.at(6, 6) = 9.0;  // unobserved, should not be chased
    CostSpec cost{y, 1.0, std::vector<unsigned char>(g.ncells(), 0)};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < 4; ++i) cost.obs_mask[g.idx(i, j)] = 1;
    ModelSpec model;
    InversionResult res = minimize(ScalarField(g, 1.0), cost, w, model, MinimizerSpec{});
    CHECK(res.iterations <= 3);
    CHECK(res.c0_hat.at(2, 2) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(res.c0_hat.at(6, 6) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("starting at the truth terminates immediately") {
    Grid g = small_channel();
    WindField w = WindField::bickley_jet(g);
    PlumeSpec p = desk_plume(g);
    p.side_x = 3.0 * g.dx;
    p.side_y = 3.0 * g.dy;
    p.center_y = 0.0;
    ScalarField truth = make_plume(g, p);
    ModelSpec model;
    model.tf = 1.0e5;
    auto [obs, lg] = integrate_forward(truth, w, model.t0, model.tf, model.scheme, model.diffusion);
    CostSpec cost{obs, 1.0, {}};
    InversionResult res = minimize(truth, cost, w, model, MinimizerSpec{});
    CHECK(res.iterations == 0);
    CHECK(res.termination == Termination::cost_tol);
    CHECK(res.history.size() == 1);
}

TEST_CASE("zero window inversion recovers the truth exactly") {
    Grid g = desk_channel();
    WindField w = WindField::bickley_jet(g);
    auto [res, truth] = run_inversion(desk_plume(g), 0.0, w, ModelSpec{}, MinimizerSpec{});
    CHECK(rel_l2_error(res.c0_hat, truth, 1.0) <= 1e-8);
}

TEST_CASE("three hour twin drops the cost at least eight orders") {
    Grid g(32, 16, 6.25e5, 3.75e5, 0.0, -3.0e6);
    WindField w = WindField::bickley_jet(g);
    ModelSpec model;
    model.scheme.cfl_max = 0.9;
    PlumeSpec p = desk_plume(g);
    p.center_y = 2.0e6;
    auto [res, truth] = run_inversion(p, 3.0 * 3600.0, w, model, MinimizerSpec{});

    for (size_t k = 1; k < res.history.size(); ++k)
        CHECK(res.history[k].cost <= res.history[k - 1].cost);
    CHECK(res.iterations <= 99);
    CHECK(res.history.back().normalized_cost <= 1e-8);
    CHECK(rel_l2_error(res.c0_hat, truth, 1.0) < 1.0);
    // the reconstruction never goes meaningfully negative
    CHECK(res.c0_hat.min_value() >= -1e-6);
}

TEST_CASE("ten substep twin stays under one percent error") {
    Grid g(128, 64, 1.5625e5, 9.375e4, 0.0, -3.0e6);
    WindField w = WindField::bickley_jet(g);
    ModelSpec model;
    model.scheme.cfl_max = 0.2;
    PlumeSpec p = desk_plume(g);
    p.center_y = 2.0e6;
    const double window = 3710.0;
    auto [res, truth] = run_inversion(p, window, w, model, MinimizerSpec{});
    auto [cf, log] = integrate_forward(truth, w, 0.0, window, model.scheme, model.diffusion);
    CHECK(log.schedule.steps.size() >= 9);
    CHECK(log.schedule.steps.size() <= 14);
    CHECK(rel_l2_error(res.c0_hat, truth, 1.0) < 1.0);
}

TEST_CASE("longer windows reconstruct worse") {
    Grid g = desk_channel();
    WindField w = WindField::bickley_jet(g);
    ModelSpec model;
    MinimizerSpec spec;
    spec.max_iters = 30;
    auto [short_res, truth_s] = run_inversion(desk_plume(g), 3.0 * 3600.0, w, model, spec);
    auto [long_res, truth_l] = run_inversion(desk_plume(g), 48.0 * 3600.0, w, model, spec);
    CHECK(short_res.history.back().normalized_cost < long_res.history.back().normalized_cost);
    CHECK(rel_l2_error(short_res.c0_hat, truth_s, 1.0) <
          rel_l2_error(long_res.c0_hat, truth_l, 1.0));
}

TEST_CASE("linear model drives the gradient to the floor") {
    Grid g = small_channel();
    WindField w = WindField::uniform(g, 10.0);
    ModelSpec model;
    model.tf = 1.0e5;
    model.scheme.scheme = AdvectionScheme::upwind1;
    model.adjoint.variant = AdjointVariant::discrete_transpose;
    PlumeSpec p = desk_plume(g);
    p.side_x = 3.0 * g.dx;
    p.side_y = 3.0 * g.dy;
    p.center_y = 0.0;
    MinimizerSpec ms;
    ms.cost_tol = 0.0;  // let the gradient criterion decide
    auto [res, truth] = run_inversion(p, model.tf, w, model, ms);
    REQUIRE(res.history.size() >= 2);
    CHECK(res.termination == Termination::grad_tol);
    CHECK(res.history.back().grad_norm <= 1e-10 * res.history.front().grad_norm);
}

TEST_CASE("cost history csv layout") {
    InversionResult res;
    res.history.push_back({0, 4.0, 1.0, 2.0, 0.0});
    res.history.push_back({1, 1.0, 0.25, 0.5, 1.0});
    const std::string path = "cost_history_test.csv";
    write_cost_history(path, res);
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "iter,cost,normalized_cost,grad_norm,step_length");
    std::getline(is, line);
    CHECK(line == "0,4,1,2,0");
    std::getline(is, line);
    CHECK(line == "1,1,0.25,0.5,1");
    CHECK(!std::getline(is, line));
    std::remove(path.c_str());
}

TEST_CASE("minimizer spec validation") {
    Grid g = small_channel();
    WindField w = WindField::uniform(g, 10.0);
    CostSpec cost{ScalarField(g, 1.0), 1.0, {}};
    MinimizerSpec bad;
    bad.c1 = 0.95;  // violates c1 < c2
    CHECK_THROWS_AS(minimize(ScalarField(g, 1.0), cost, w, ModelSpec{}, bad), ConfigError);
    MinimizerSpec bad2;
    bad2.max_iters = 0;
    CHECK_THROWS_AS(minimize(ScalarField(g, 1.0), cost, w, ModelSpec{}, bad2), ConfigError);
}
