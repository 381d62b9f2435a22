#include "ctm/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>

#include "ctm/errors.hpp"

namespace ctm {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::max_iters: return "max_iters";
        case Termination::grad_tol: return "grad_tol";
        case Termination::cost_tol: return "cost_tol";
        case Termination::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

std::pair<double, ScalarField> cost_and_gradient(const ScalarField& c0, const CostSpec& cost,
                                                 const WindField& w, const ModelSpec& model) {
    if (c0.grid != cost.observations.grid)
        throw ShapeError("cost_and_gradient: state and observation grids differ");
    if (!cost.obs_mask.empty() &&
        cost.obs_mask.size() != static_cast<size_t>(c0.grid.ncells()))
        throw ShapeError("cost_and_gradient: observation mask size mismatch");

    const bool need_traj = model.adjoint.variant == AdjointVariant::discrete_transpose &&
                           model.scheme.scheme == AdvectionScheme::vanleer2;
    std::vector<ScalarField> traj;
    auto [cf, log] = integrate_forward(c0, w, model.t0, model.tf, model.scheme, model.diffusion,
                                       need_traj ? &traj : nullptr);
    ScalarField resid(c0.grid);
    for (size_t k = 0; k < resid.values.size(); ++k) {
        const bool seen = cost.obs_mask.empty() || cost.obs_mask[k];
        resid.values[k] = seen ? cf.values[k] - cost.observations.values[k] : 0.0;
    }
    const double j = 0.5 * inner_product(resid, resid);
    ScalarField g = integrate_adjoint(resid, w, model.t0, model.tf, model.scheme, model.diffusion,
                                      model.adjoint, need_traj ? &traj : nullptr);
    return {j, std::move(g)};
}

namespace {

struct Evaluation {
    double j = 0.0;
    ScalarField g;
};

struct LinePoint {
    double alpha = 0.0;
    double phi = 0.0;
    double dphi = 0.0;
    Evaluation eval;
};

struct SearchResult {
    bool ok = false;
    LinePoint at;
};

ScalarField axpy(const ScalarField& x, double a, const ScalarField& p) {
    ScalarField out(x.grid);
    for (size_t k = 0; k < x.values.size(); ++k) out.values[k] = x.values[k] + a * p.values[k];
    return out;
}

}  // namespace

InversionResult minimize(const ScalarField& c0_init, const CostSpec& cost, const WindField& w,
                         const ModelSpec& model, const MinimizerSpec& spec) {
    if (!(spec.c1 > 0.0 && spec.c1 < spec.c2 && spec.c2 < 1.0))
        throw ConfigError("minimize: need 0 < c1 < c2 < 1");
    if (spec.max_iters < 1) throw ConfigError("minimize: max_iters must be >= 1");
    if (spec.memory < 1) throw ConfigError("minimize: memory must be >= 1");

    InversionResult res;
    long evals = 0;
    auto evaluate = [&](const ScalarField& x) {
        ++evals;
        auto [j, g] = cost_and_gradient(x, cost, w, model);
        return Evaluation{j, std::move(g)};
    };

    ScalarField x = c0_init;
    Evaluation cur = evaluate(x);
    const double j0 = cur.j;
    const double g0norm = norm_l2(cur.g);
    res.history.push_back({0, cur.j, 1.0, g0norm, 0.0});

    std::deque<ScalarField> s_hist, y_hist;
    std::deque<double> rho_hist;

    res.termination = Termination::max_iters;
    int iter = 0;
    if (j0 == 0.0) {
        res.termination = Termination::cost_tol;
    } else if (g0norm == 0.0) {
        res.termination = Termination::grad_tol;
    } else {
        for (iter = 1; iter <= spec.max_iters; ++iter) {
            // two-loop recursion
            ScalarField q = cur.g;
            std::vector<double> alphas(s_hist.size(), 0.0);
            for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
                alphas[i] = rho_hist[i] * inner_product(s_hist[i], q);
                for (size_t k = 0; k < q.values.size(); ++k)
                    q.values[k] -= alphas[i] * y_hist[i].values[k];
            }
            double gamma = 1.0;
            if (!s_hist.empty()) {
                const double yy = inner_product(y_hist.back(), y_hist.back());
                if (yy > 0.0) gamma = inner_product(s_hist.back(), y_hist.back()) / yy;
            }
            ScalarField p(x.grid);
            for (size_t k = 0; k < p.values.size(); ++k) p.values[k] = gamma * q.values[k];
            for (size_t i = 0; i < s_hist.size(); ++i) {
                const double beta = rho_hist[i] * inner_product(y_hist[i], p);
                for (size_t k = 0; k < p.values.size(); ++k)
                    p.values[k] += (alphas[i] - beta) * s_hist[i].values[k];
            }
            for (auto& v : p.values) v = -v;

            double dphi0 = inner_product(cur.g, p);
            if (!(dphi0 < 0.0)) {  // not a descent direction, fall back to steepest
                p = cur.g;
                for (auto& v : p.values) v = -v;
                dphi0 = -inner_product(cur.g, cur.g);
            }

            const double phi0 = cur.j;
            // strong Wolfe search, bracket then zoom
            auto wolfe_search = [&](const ScalarField& dir, double d0) {
                int budget = spec.max_evals_per_search;
                auto probe = [&](double a) {
                    Evaluation e = evaluate(axpy(x, a, dir));
                    --budget;
                    const double d = inner_product(e.g, dir);
                    return LinePoint{a, e.j, d, std::move(e)};
                };
                auto zoom = [&](LinePoint lo, LinePoint hi) {
                    while (budget > 0) {
                        double a;
                        const double span = hi.alpha - lo.alpha;
                        const double denom = 2.0 * (hi.phi - lo.phi - lo.dphi * span);
                        a = lo.alpha - lo.dphi * span * span / denom;
                        const double amin = std::min(lo.alpha, hi.alpha);
                        const double amax = std::max(lo.alpha, hi.alpha);
                        const double margin = 0.05 * (amax - amin);
                        if (!std::isfinite(a) || a < amin + margin || a > amax - margin)
                            a = 0.5 * (lo.alpha + hi.alpha);
                        if (amax - amin < 1e-14 * std::max(1.0, amax)) break;
                        LinePoint pt = probe(a);
                        if (pt.phi > phi0 + spec.c1 * pt.alpha * d0 || pt.phi >= lo.phi) {
                            hi = std::move(pt);
                        } else {
                            if (std::abs(pt.dphi) <= -spec.c2 * d0)
                                return SearchResult{true, std::move(pt)};
                            if (pt.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                            lo = std::move(pt);
                        }
                    }
                    // budget exhausted; settle for sufficient decrease if we have it
                    if (lo.alpha > 0.0 && lo.phi <= phi0 + spec.c1 * lo.alpha * d0)
                        return SearchResult{true, std::move(lo)};
                    return SearchResult{};
                };

                LinePoint prev{0.0, phi0, d0, {}};
                double a = 1.0;
                bool first = true;
                while (budget > 0) {
                    LinePoint pt = probe(a);
                    if (pt.phi > phi0 + spec.c1 * a * d0 || (!first && pt.phi >= prev.phi))
                        return zoom(std::move(prev), std::move(pt));
                    if (std::abs(pt.dphi) <= -spec.c2 * d0)
                        return SearchResult{true, std::move(pt)};
                    if (pt.dphi >= 0.0) return zoom(std::move(pt), std::move(prev));
                    if (a >= 1e6) break;
                    prev = std::move(pt);
                    a *= 2.0;
                    first = false;
                }
                return SearchResult{};
            };

            SearchResult found = wolfe_search(p, dphi0);
            if (!found.ok && !s_hist.empty()) {
                // slope-limiter kinks can defeat the curvature condition along
                // quasi-Newton directions; drop the memory and retry steepest
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                p = cur.g;
                for (auto& v : p.values) v = -v;
                dphi0 = -inner_product(cur.g, cur.g);
                found = wolfe_search(p, dphi0);
            }
            if (!found.ok) {
                // last resort: plain backtracking, keeps the iterates monotone
                double a = 1.0;
                for (int k = 0; k < spec.max_evals_per_search && !found.ok; ++k) {
                    Evaluation e = evaluate(axpy(x, a, p));
                    if (e.j <= phi0 + spec.c1 * a * dphi0) {
                        const double d = inner_product(e.g, p);
                        found = SearchResult{true, {a, e.j, d, std::move(e)}};
                    } else {
                        a *= 0.5;
                    }
                }
            }

            if (!found.ok) {
                res.termination = Termination::line_search_failure;
                --iter;
                break;
            }

            ScalarField xnew = axpy(x, found.at.alpha, p);
            ScalarField s(x.grid), yv(x.grid);
            for (size_t k = 0; k < x.values.size(); ++k) {
                s.values[k] = xnew.values[k] - x.values[k];
                yv.values[k] = found.at.eval.g.values[k] - cur.g.values[k];
            }
            const double sy = inner_product(s, yv);
            if (sy > 1e-10 * norm_l2(s) * norm_l2(yv)) {
                s_hist.push_back(std::move(s));
                y_hist.push_back(std::move(yv));
                rho_hist.push_back(1.0 / sy);
                if (static_cast<int>(s_hist.size()) > spec.memory) {
                    s_hist.pop_front();
                    y_hist.pop_front();
                    rho_hist.pop_front();
                }
            }

            x = std::move(xnew);
            cur = std::move(found.at.eval);
            const double gn = norm_l2(cur.g);
            res.history.push_back({iter, cur.j, cur.j / j0, gn, found.at.alpha});

            if (gn <= spec.grad_tol * g0norm) {
                res.termination = Termination::grad_tol;
                break;
            }
            if (cur.j / j0 <= spec.cost_tol) {
                res.termination = Termination::cost_tol;
                break;
            }
            if (iter == spec.max_iters) {
                res.termination = Termination::max_iters;
                break;
            }
        }
    }

    res.c0_hat = std::move(x);
    res.iterations = std::min(iter, spec.max_iters);
    res.cost_evals = evals;
    return res;
}

std::pair<InversionResult, ScalarField> run_inversion(const PlumeSpec& plume, double window,
                                                      const WindField& w, const ModelSpec& model,
                                                      const MinimizerSpec& spec) {
    if (!(window >= 0.0)) throw ConfigError("run_inversion: window must be >= 0");
    const Grid& g = w.grid();
    ScalarField truth = make_plume(g, plume);
    ModelSpec m = model;
    m.tf = model.t0 + window;
    auto [obs, log] = integrate_forward(truth, w, m.t0, m.tf, m.scheme, m.diffusion);
    CostSpec cost;
    cost.observations = std::move(obs);
    cost.background = plume.background;
    ScalarField start(g, plume.background);
    InversionResult res = minimize(start, cost, w, m, spec);
    return {std::move(res), std::move(truth)};
}

void write_cost_history(const std::string& path, const InversionResult& result) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << "iter,cost,normalized_cost,grad_norm,step_length\n";
    char buf[480];
    for (const IterRecord& r : result.history) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.cost,
                      r.normalized_cost, r.grad_norm, r.step_length);
        os << buf;
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace ctm
