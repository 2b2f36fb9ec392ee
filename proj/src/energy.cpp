#include "otd/energy.hpp"

#include <cmath>

namespace otd {

Density make_density(ScalarField f, double eps_rel) {
    const Grid& g = *f.grid;
    if (!f.all_finite()) throw EnergyError("density: non-finite values");
    for (int id = 0; id < g.n_total(); ++id) {
        if (f[id] < 0.0) throw EnergyError("density: negative values");
        if (g.is_boundary(id) && f[id] != 0.0)
            throw EnergyError("density: nonzero boundary trace");
    }
    return Density{std::move(f), eps_rel};
}

Density project_density(ScalarField f, double eps_rel) {
    const Grid& g = *f.grid;
    for (int id = 0; id < g.n_total(); ++id) {
        if (g.is_boundary(id))
            f[id] = 0.0;
        else
            f[id] = std::max(f[id], 0.0);
    }
    return Density{std::move(f), eps_rel};
}

Density zero_density(const Grid& g) { return Density{ScalarField(g)}; }

ScalarField nodal_grad_sq(const ScalarField& u) {
    const Grid& g = *u.grid;
    ScalarField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h = 1.0 / g.h(a);
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            const double ge = (u[r] - u[l]) * inv_h;
            const double c = 0.5 * g.edge_w(a, e) * ge * ge;
            out[l] += c;
            out[r] += c;
        }
    }
    for (int id = 0; id < g.n_total(); ++id) out[id] /= g.w(id);
    return out;
}

double sobolev_pp(const ScalarField& mu, double p) {
    const Grid& g = *mu.grid;
    long double s = 0.0L;
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h = 1.0 / g.h(a);
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            const double ge = std::abs(mu[r] - mu[l]) * inv_h;
            s += static_cast<long double>(g.edge_w(a, e)) * std::pow(ge, p);
        }
    }
    return static_cast<double>(s);
}

ScalarField p_laplacian(const Density& mu, double p) {
    const Grid& g = *mu.field.grid;
    EdgeField flux(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h = 1.0 / g.h(a);
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            const double ge = (mu.field[r] - mu.field[l]) * inv_h;
            const double m = std::abs(ge);
            flux.comp[a][e] = m > 0.0 ? std::pow(m, p - 2.0) * ge : 0.0;
        }
    }
    ScalarField out = div(flux);
    for (int id = 0; id < g.n_total(); ++id)
        if (g.is_boundary(id)) out[id] = 0.0;
    return out;
}

EnergyEval evaluate(const Density& mu, const RegParams& params,
                    const SourceData& f, double tol, const Potential* guess) {
    auto [u, rep] = solve_weighted_neumann(mu.field, params, f, tol, 0, guess);
    EnergyEval ev;
    ev.energy.L = rep.dirichlet_energy;
    ev.energy.M = integrate(mu.field);
    ev.energy.sobolev =
        params.delta > 0.0 ? params.delta * sobolev_pp(mu.field, params.p) : 0.0;
    ev.energy.total = (ev.energy.L + ev.energy.M) + ev.energy.sobolev;
    ev.u = std::move(u);
    ev.report = rep;
    return ev;
}

EnergyBreakdown eval_energy(const Density& mu, const RegParams& params,
                            const SourceData& f, double tol) {
    return evaluate(mu, params, f, tol).energy;
}

ScalarField grad_E_at(const Density& mu, const RegParams& params,
                      const Potential& u) {
    const Grid& g = *mu.field.grid;
    ScalarField gsq = nodal_grad_sq(u.field);
    ScalarField out(g);
    if (params.delta > 0.0) {
        ScalarField lap = p_laplacian(mu, params.p);
        for (int id = 0; id < g.n_total(); ++id)
            out[id] = 1.0 - gsq[id] - params.delta * params.p * lap[id];
    } else {
        for (int id = 0; id < g.n_total(); ++id) out[id] = 1.0 - gsq[id];
    }
    return out;
}

ScalarField grad_E(const Density& mu, const RegParams& params,
                   const SourceData& f, double tol) {
    auto [u, rep] = solve_weighted_neumann(mu.field, params, f, tol);
    return grad_E_at(mu, params, u);
}

ScalarField minimal_subgradient_at(const Density& mu, const RegParams& params,
                                   const Potential& u) {
    const Grid& g = *mu.field.grid;
    ScalarField xi = grad_E_at(mu, params, u);
    ScalarField gsq = nodal_grad_sq(u.field);
    const double eps = mu.eps_supp();
    for (int id = 0; id < g.n_total(); ++id) {
        if (g.is_boundary(id)) {
            xi[id] = 0.0;
        } else if (!(mu.field[id] > eps)) {
            // on {mu = 0}: only the mass-injecting part survives
            const double a = 1.0 - gsq[id];
            xi[id] = a < 0.0 ? a : 0.0;
        }
    }
    return xi;
}

ScalarField minimal_subgradient(const Density& mu, const RegParams& params,
                                const SourceData& f, double tol) {
    auto [u, rep] = solve_weighted_neumann(mu.field, params, f, tol);
    return minimal_subgradient_at(mu, params, u);
}

}  // namespace otd
