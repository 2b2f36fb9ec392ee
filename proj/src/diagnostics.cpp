#include "otd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace otd {

namespace {

double pde_residual_rel(const ScalarField& mu, double lambda,
                        const ScalarField& u, const SourceData& f) {
    const Grid& g = *mu.grid;
    WeightedOperator op(mu, lambda);
    std::vector<double> Ku(g.n_total());
    op.apply(u.values, Ku);
    double num = 0.0, den = 0.0;
    for (int id = 0; id < g.n_total(); ++id) {
        const double r = Ku[id] - g.w(id) * f.field[id];
        num += r * r;
        const double b = g.w(id) * f.field[id];
        den += b * b;
    }
    num = std::sqrt(num);
    den = std::sqrt(den);
    return den > 0.0 ? num / den : num;
}

}  // namespace

ResidualReport mk_residuals(const Density& mu, const Potential& u,
                            const SourceData& f) {
    const Grid& g = *mu.field.grid;
    require_same_grid(g, *u.field.grid);
    ResidualReport r;
    r.pde_residual = pde_residual_rel(mu.field, 0.0, u.field, f);

    ScalarField gsq = nodal_grad_sq(u.field);
    const double eps = mu.eps_supp();
    double comp_lo = 0.0, comp_hi = 0.0;
    for (int id = 0; id < g.n_total(); ++id) {
        if (mu.field[id] > eps)
            r.stationarity = std::max(r.stationarity, std::abs(gsq[id] - 1.0));
        else
            r.eikonal_excess =
                std::max(r.eikonal_excess, std::max(gsq[id] - 1.0, 0.0));
        const double gn = std::sqrt(std::max(gsq[id], 0.0));
        comp_lo += g.w(id) * mu.field[id] * std::max(1.0 - gn, 0.0);
        comp_hi += g.w(id) * mu.field[id] * std::max(gn - 1.0, 0.0);
    }
    r.complementarity = comp_lo + comp_hi;
    return r;
}

ResidualReport regularized_residuals(const Density& mu, const Potential& u,
                                     const RegParams& params,
                                     const SourceData& f) {
    const Grid& g = *mu.field.grid;
    require_same_grid(g, *u.field.grid);
    ResidualReport r;
    r.pde_residual = pde_residual_rel(mu.field, params.lambda, u.field, f);

    ScalarField gsq = nodal_grad_sq(u.field);
    ScalarField lap = p_laplacian(mu, params.p);
    const double eps = mu.eps_supp();
    double comp_lo = 0.0, comp_hi = 0.0;
    for (int id = 0; id < g.n_total(); ++id) {
        if (mu.field[id] > eps) {
            const double s =
                1.0 - gsq[id] - params.delta * params.p * lap[id];
            r.stationarity = std::max(r.stationarity, std::abs(s));
        } else {
            r.eikonal_excess =
                std::max(r.eikonal_excess, std::max(gsq[id] - 1.0, 0.0));
        }
        const double gn = std::sqrt(std::max(gsq[id], 0.0));
        comp_lo += g.w(id) * mu.field[id] * std::max(1.0 - gn, 0.0);
        comp_hi += g.w(id) * mu.field[id] * std::max(gn - 1.0, 0.0);
    }
    r.complementarity = comp_lo + comp_hi;
    return r;
}

void write_residual_csv(std::ostream& os, const ResidualReport& r, bool header) {
    os.precision(17);
    if (header)
        os << "pde_residual,eikonal_excess,stationarity,complementarity\n";
    os << r.pde_residual << ',' << r.eikonal_excess << ',' << r.stationarity
       << ',' << r.complementarity << '\n';
}

Density oracle_1d(const SourceData& f) {
    const Grid& g = *f.field.grid;
    if (g.dim() != 1) throw DiagnosticsError("oracle_1d: 1D only");
    ScalarField mu(g);
    double F = 0.0;
    mu[0] = 0.0;
    for (int i = 1; i < g.n(0); ++i) {
        F += 0.5 * g.h(0) * (f.field[i - 1] + f.field[i]);
        mu[i] = std::abs(F);
    }
    return project_density(std::move(mu));
}

BruteForceResult brute_force_minimize(const RegParams& params,
                                      const SourceData& f, std::uint64_t seed,
                                      int n_starts, int max_iter,
                                      double grad_tol) {
    const Grid& g = *f.field.grid;
    const int N = g.n_total();
    if (N > 25)
        throw DiagnosticsError("brute force: grid limited to 25 nodes");
    if (!(params.delta > 0.0))
        throw DiagnosticsError("brute force: requires delta > 0");

    const double solve_tol = 1e-13;
    std::vector<int> dofs;
    for (int id = 0; id < N; ++id)
        if (!g.is_boundary(id)) dofs.push_back(id);

    auto E_of = [&](const ScalarField& v) {
        return eval_energy(Density{v}, params, f, solve_tol).total;
    };

    // central-difference gradient in the free coordinates
    auto fd_grad = [&](ScalarField v, std::vector<double>& grad) {
        const double eps = 1e-5;
        for (std::size_t k = 0; k < dofs.size(); ++k) {
            const int id = dofs[k];
            const double save = v[id];
            v[id] = save + eps;
            const double ep = E_of(v);
            v[id] = std::max(save - eps, 0.0);
            const double em = E_of(v);
            const double back = save - v[id];  // one-sided at the bound
            v[id] = save;
            grad[k] = (ep - em) / (eps + back);
        }
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double scale = std::max(max_abs(f.field), 0.1);

    BruteForceResult res;
    double best = std::numeric_limits<double>::infinity();
    ScalarField best_mu;

    for (int s = 0; s < n_starts; ++s) {
        ScalarField v(g);
        if (s == 1) {
            for (int id : dofs) v[id] = 0.5 * scale;
        } else if (s >= 2) {
            for (int id : dofs) v[id] = scale * unif(rng);
        }
        double E = E_of(v);
        std::vector<double> grad(dofs.size());
        double step = 1.0;
        for (int it = 0; it < max_iter; ++it) {
            fd_grad(v, grad);
            double pgnorm = 0.0;
            for (std::size_t k = 0; k < dofs.size(); ++k) {
                const double pg =
                    (v[dofs[k]] > 0.0 || grad[k] < 0.0) ? grad[k] : 0.0;
                pgnorm += pg * pg;
            }
            pgnorm = std::sqrt(pgnorm);
            if (pgnorm <= grad_tol) break;

            bool ok = false;
            while (step >= 1e-16) {
                ScalarField trial = v;
                for (std::size_t k = 0; k < dofs.size(); ++k)
                    trial[dofs[k]] = std::max(v[dofs[k]] - step * grad[k], 0.0);
                const double Et = E_of(trial);
                if (Et < E - 1e-16) {
                    v = std::move(trial);
                    E = Et;
                    step *= 2.0;
                    ok = true;
                    break;
                }
                step *= 0.5;
            }
            if (!ok) break;
        }
        res.start_values.push_back(E);
        if (E < best) {
            best = E;
            best_mu = v;
        }
    }

    res.best_value = best;
    int hits = 0;
    for (double v : res.start_values)
        if (std::abs(v - best) <= 1e-9) ++hits;
    res.reproducible = hits >= 3;
    res.mu = project_density(std::move(best_mu));
    return res;
}

}  // namespace otd
