#include "otd/metric.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

namespace otd {

DwBasis build_dw_basis(const Grid& g, int K) {
    if (K < 1) throw MetricError("dw basis: K must be >= 1");
    DwBasis b;
    b.grid = &g;
    b.phis.reserve(K);
    b.weights.reserve(K);

    auto mode = [&](int mx, int my) {
        ScalarField phi(g);
        const double Lx = g.hi(0) - g.lo(0);
        const double Ly = g.dim() == 2 ? g.hi(1) - g.lo(1) : 1.0;
        for (int id = 0; id < g.n_total(); ++id) {
            auto c = g.coord(id);
            double v = std::cos(mx * std::numbers::pi * (c[0] - g.lo(0)) / Lx);
            if (g.dim() == 2 && my > 0)
                v *= std::cos(my * std::numbers::pi * (c[1] - g.lo(1)) / Ly);
            phi[id] = v;
        }
        return phi;
    };

    int k = 0;
    for (int total = 0; k < K; ++total) {
        if (g.dim() == 1) {
            b.phis.push_back(mode(total, 0));
            b.weights.push_back(std::ldexp(1.0, -k));
            ++k;
        } else {
            for (int mx = 0; mx <= total && k < K; ++mx) {
                b.phis.push_back(mode(mx, total - mx));
                b.weights.push_back(std::ldexp(1.0, -k));
                ++k;
            }
        }
    }
    return b;
}

std::vector<double> dw_moments(const ScalarField& mu, const DwBasis& basis) {
    require_same_grid(*mu.grid, *basis.grid);
    std::vector<double> m(basis.K());
    for (int k = 0; k < basis.K(); ++k) m[k] = inner(mu, basis.phis[k]);
    return m;
}

double dw2(const ScalarField& mu, const ScalarField& nu, const DwBasis& basis) {
    require_same_grid(*mu.grid, *nu.grid);
    std::vector<double> a = dw_moments(mu, basis), b = dw_moments(nu, basis);
    double s = 0.0;
    for (int k = 0; k < basis.K(); ++k) {
        const double d = a[k] - b[k];
        s += basis.weights[k] * d * d;
    }
    return s;
}

double dw(const ScalarField& mu, const ScalarField& nu, const DwBasis& basis) {
    return std::sqrt(dw2(mu, nu, basis));
}

namespace {

// L^2(w) gradient of nu -> d_w^2(mu_ref, nu)/(2 tau) at nu
ScalarField dw_gradient(const std::vector<double>& m_nu,
                        const std::vector<double>& m_ref, const DwBasis& basis,
                        double tau) {
    const Grid& g = *basis.grid;
    ScalarField out(g);
    for (int k = 0; k < basis.K(); ++k) {
        const double c = basis.weights[k] * (m_nu[k] - m_ref[k]) / tau;
        if (c == 0.0) continue;
        for (int id = 0; id < g.n_total(); ++id)
            out[id] += c * basis.phis[k][id];
    }
    return out;
}

}  // namespace

std::pair<Density, JkoStepReport> jko_step(const Density& mu_k, double tau,
                                           const RegParams& params,
                                           const SourceData& f,
                                           const DwBasis& basis,
                                           const JkoConfig& cfg) {
    if (!(tau > 0.0)) throw MetricError("jko: tau must be > 0");
    const Grid& g = *mu_k.field.grid;
    std::vector<double> m_ref = dw_moments(mu_k.field, basis);

    Density nu = mu_k;
    EnergyEval ev = evaluate(nu, params, f, cfg.solve_tol);
    double obj = ev.energy.total;  // d_w term vanishes at nu = mu_k

    JkoStepReport rep;
    double step = tau;  // natural proximal scale
    int it = 0;
    for (; it < cfg.inner_max_iter; ++it) {
        std::vector<double> m_nu = dw_moments(nu.field, basis);
        ScalarField grad = grad_E_at(nu, params, ev.u);
        ScalarField gw = dw_gradient(m_nu, m_ref, basis, tau);
        for (int id = 0; id < g.n_total(); ++id) grad[id] += gw[id];

        // projected-gradient stationarity measure on the cone
        ScalarField pg(g);
        const double eps = nu.eps_supp();
        for (int id = 0; id < g.n_total(); ++id) {
            if (g.is_boundary(id)) continue;
            if (nu.field[id] > eps || grad[id] < 0.0) pg[id] = grad[id];
        }
        rep.grad_norm = l2_norm(pg);
        if (rep.grad_norm <= cfg.inner_tol) {
            rep.converged = true;
            break;
        }

        bool accepted = false;
        while (step >= 1e-14) {
            ScalarField trial = nu.field;
            for (int id = 0; id < g.n_total(); ++id)
                trial[id] -= step * grad[id];
            Density cand = project_density(std::move(trial), nu.eps_rel);
            EnergyEval cev = evaluate(cand, params, f, cfg.solve_tol, &ev.u);
            const double cobj =
                cev.energy.total + dw2(cand.field, mu_k.field, basis) / (2.0 * tau);
            ScalarField diff = cand.field;
            for (int id = 0; id < g.n_total(); ++id) diff[id] -= nu.field[id];
            const double decrease = 0.1 / step * inner(diff, diff);
            if (cobj <= obj - decrease) {
                nu = std::move(cand);
                ev = std::move(cev);
                obj = cobj;
                step = std::min(step * 2.0, 1e6 * tau);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no acceptable step: best iterate stands
    }
    rep.iterations = it;
    rep.objective = obj;
    rep.energy = ev.energy;
    rep.dw_increment = dw(nu.field, mu_k.field, basis);
    return {std::move(nu), rep};
}

JkoResult run_jko(const Density& mu0, const RegParams& params,
                  const SourceData& f, const DwBasis& basis,
                  const JkoConfig& cfg) {
    for (double tau : cfg.tau_schedule)
        if (!(tau > 0.0)) throw MetricError("jko: tau schedule must be positive");
    JkoResult res;
    res.iterates.push_back(mu0);
    double t = 0.0;
    {
        EnergyBreakdown e0 = eval_energy(mu0, params, f, cfg.solve_tol);
        res.records.push_back(
            {t, e0.total, e0.L, e0.M, e0.sobolev, 0.0, e0.M, 0.0, 0.0});
    }
    for (double tau : cfg.tau_schedule) {
        auto [nu, rep] = jko_step(res.iterates.back(), tau, params, f, basis, cfg);
        t += tau;
        res.records.push_back({t, rep.energy.total, rep.energy.L, rep.energy.M,
                               rep.energy.sobolev, rep.grad_norm, rep.energy.M,
                               tau, rep.dw_increment});
        res.iterates.push_back(std::move(nu));
        res.reports.push_back(rep);
    }
    return res;
}

std::vector<double> evi_residual(const JkoResult& chain, const Density& nu,
                                 const RegParams& params, const SourceData& f,
                                 const DwBasis& basis,
                                 const std::vector<double>& taus) {
    const double E_nu = eval_energy(nu, params, f).total;
    std::vector<double> res;
    for (std::size_t k = 0; k + 1 < chain.iterates.size(); ++k) {
        const double d_next = dw2(chain.iterates[k + 1].field, nu.field, basis);
        const double d_prev = dw2(chain.iterates[k].field, nu.field, basis);
        const double E_next =
            eval_energy(chain.iterates[k + 1], params, f).total;
        res.push_back((d_next - d_prev) / (2.0 * taus[k]) - (E_nu - E_next));
    }
    return res;
}

double violation_fraction(const std::vector<double>& residuals, double tol) {
    if (residuals.empty()) return 0.0;
    int bad = 0;
    for (double r : residuals)
        if (r > tol) ++bad;
    return static_cast<double>(bad) / residuals.size();
}

void write_jko_csv(std::ostream& os, const std::vector<JkoRecord>& rows) {
    os.precision(17);
    os << "t,E_total,L,M,sobolev,grad_norm,mass,tau,dw_inc\n";
    for (const auto& r : rows)
        os << r.t << ',' << r.E_total << ',' << r.L << ',' << r.M << ','
           << r.sobolev << ',' << r.grad_norm << ',' << r.mass << ',' << r.tau
           << ',' << r.dw_inc << '\n';
}

void write_jko_csv(const std::string& path, const std::vector<JkoRecord>& rows) {
    std::ofstream os(path);
    if (!os) throw MetricError("cannot open " + path);
    write_jko_csv(os, rows);
}

}  // namespace otd
