#include "otd/elliptic.hpp"

#include <cmath>
#include <numeric>

namespace otd {

WeightedOperator::WeightedOperator(const ScalarField& mu, double lambda)
    : grid_(mu.grid) {
    const Grid& g = *grid_;
    for (int id = 0; id < g.n_total(); ++id)
        if (mu[id] < 0.0)
            throw EllipticError("weighted operator: mu has negative entries");
    for (int a = 0; a < g.dim(); ++a) {
        a_[a].resize(g.n_edges(a));
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            a_[a][e] = 0.5 * (mu[l] + mu[r]) + lambda;
        }
    }
}

void WeightedOperator::apply(const std::vector<double>& u,
                             std::vector<double>& out) const {
    const Grid& g = *grid_;
    out.assign(g.n_total(), 0.0);
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h2 = 1.0 / (g.h(a) * g.h(a));
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            const double k = g.edge_w(a, e) * a_[a][e] * inv_h2;
            const double d = k * (u[r] - u[l]);
            out[l] -= d;
            out[r] += d;
        }
    }
}

double WeightedOperator::energy(const ScalarField& u) const {
    const Grid& g = *grid_;
    long double s = 0.0L;
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h = 1.0 / g.h(a);
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            const long double ge = (static_cast<long double>(u[r]) - u[l]) *
                                   inv_h;
            s += g.edge_w(a, e) * a_[a][e] * ge * ge;
        }
    }
    return static_cast<double>(s);
}

std::vector<double> WeightedOperator::diagonal() const {
    const Grid& g = *grid_;
    std::vector<double> d(g.n_total(), 0.0);
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h2 = 1.0 / (g.h(a) * g.h(a));
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            const double k = g.edge_w(a, e) * a_[a][e] * inv_h2;
            d[l] += k;
            d[r] += k;
        }
    }
    return d;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// 2<f,u> - a(u,u): equals a(u,u) at the exact solution but is second-order
// insensitive to solver error in u, so reported energies stay smooth in mu
double stationary_energy(const WeightedOperator& op, const Potential& u,
                         const std::vector<double>& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < b.size(); ++i)
        s += 2.0L * b[i] * u.field.values[i];
    return static_cast<double>(s) - op.energy(u.field);
}

void project_zero_mean(const Grid& g, std::vector<double>& u) {
    double m = 0.0, wtot = 0.0;
    for (int id = 0; id < g.n_total(); ++id) {
        m += g.w(id) * u[id];
        wtot += g.w(id);
    }
    m /= wtot;
    for (double& v : u) v -= m;
}

// 1D direct path: the operator is symmetric tridiagonal with kernel = span{1};
// pin u[0] = 0, eliminate by the Thomas algorithm, then shift to zero mean
std::vector<double> solve_tridiagonal_neumann(const Grid& g,
                                              const WeightedOperator& op,
                                              const std::vector<double>& b) {
    const int N = g.n_total();
    const double inv_h2 = 1.0 / (g.h(0) * g.h(0));
    std::vector<double> off(N - 1), dia(N, 0.0);
    for (int e = 0; e < N - 1; ++e) {
        const double k = g.edge_w(0, e) * op.edge_conductivity(0, e) * inv_h2;
        off[e] = -k;
        dia[e] += k;
        dia[e + 1] += k;
    }
    // reduced system in u[1..N-1]
    std::vector<double> c(N - 1), d(N - 1);
    double prev_c = 0.0;
    for (int i = 1; i < N; ++i) {
        const double low = i > 1 ? off[i - 1] : 0.0;
        const double denom = dia[i] - low * prev_c;
        prev_c = i < N - 1 ? off[i] / denom : 0.0;
        c[i - 1] = prev_c;
        d[i - 1] = (b[i] - low * (i > 1 ? d[i - 2] : 0.0)) / denom;
    }
    std::vector<double> u(N, 0.0);
    u[N - 1] = d[N - 2];
    for (int i = N - 2; i >= 1; --i) u[i] = d[i - 1] - c[i - 1] * u[i + 1];
    project_zero_mean(g, u);
    return u;
}

}  // namespace

std::pair<Potential, SolveReport> solve_weighted_neumann(
    const ScalarField& mu, const RegParams& params, const SourceData& f,
    double tol, int max_iter, const Potential* guess) {
    require_same_grid(*mu.grid, *f.field.grid);
    const Grid& g = *mu.grid;
    const int N = g.n_total();
    if (max_iter <= 0) max_iter = std::max(1000, 20 * N);

    WeightedOperator op(mu, params.lambda);

    // symmetric form: K u = b with K = W A, b = W f; kernel of K = constants
    std::vector<double> b(N);
    for (int id = 0; id < N; ++id) b[id] = g.w(id) * f.field[id];
    // remove any residual mass imbalance so b is in range(K)
    {
        double s = std::accumulate(b.begin(), b.end(), 0.0), wtot = 0.0;
        for (int id = 0; id < N; ++id) wtot += g.w(id);
        for (int id = 0; id < N; ++id) b[id] -= g.w(id) * (s / wtot);
    }

    const double bnorm = std::sqrt(dot(b, b));
    Potential pot{ScalarField(g)};
    SolveReport rep;
    if (bnorm == 0.0) {
        rep.converged = true;
        return {std::move(pot), rep};
    }

    if (g.dim() == 1) {
        pot.field.values = solve_tridiagonal_neumann(g, op, b);
        // iterative refinement buys back the digits lost to high-contrast
        // conductivities
        std::vector<double> Ku(N), r(N);
        double rn = 0.0;
        for (int pass = 0; pass < 4; ++pass) {
            op.apply(pot.field.values, Ku);
            rn = 0.0;
            for (int id = 0; id < N; ++id) {
                r[id] = b[id] - Ku[id];
                rn += r[id] * r[id];
            }
            rn = std::sqrt(rn);
            if (rn <= std::max(tol, 1e-13) * bnorm) break;
            std::vector<double> d = solve_tridiagonal_neumann(g, op, r);
            for (int id = 0; id < N; ++id) pot.field.values[id] += d[id];
            project_zero_mean(g, pot.field.values);
        }
        rep.residual_norm = rn / bnorm;
        rep.converged = rep.residual_norm <= std::max(tol, 1e-10);
        rep.dirichlet_energy = stationary_energy(op, pot, b);
        if (!rep.converged)
            throw EllipticError(
                "weighted Neumann solve did not converge, residual " +
                std::to_string(rep.residual_norm));
        return {std::move(pot), rep};
    }

    std::vector<double> diag = op.diagonal();
    std::vector<double> u(N, 0.0), r(N), z(N), p(N), Ap(N);
    if (guess != nullptr && guess->field.grid == &g) {
        u = guess->field.values;
        op.apply(u, Ap);
        for (int id = 0; id < N; ++id) r[id] = b[id] - Ap[id];
    } else {
        r = b;
    }

    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (int id = 0; id < N; ++id) out[id] = in[id] / diag[id];
        project_zero_mean(g, out);
    };

    precond(r, z);
    p = z;
    double rz = dot(r, z);
    double rnorm = std::sqrt(dot(r, r));
    int it = 0;
    for (; it < max_iter && rnorm > tol * bnorm; ++it) {
        op.apply(p, Ap);
        const double pAp = dot(p, Ap);
        if (pAp <= 0.0) break;
        const double alpha = rz / pAp;
        for (int id = 0; id < N; ++id) {
            u[id] += alpha * p[id];
            r[id] -= alpha * Ap[id];
        }
        rnorm = std::sqrt(dot(r, r));
        precond(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int id = 0; id < N; ++id) p[id] = z[id] + beta * p[id];
    }

    project_zero_mean(g, u);
    pot.field.values = std::move(u);
    rep.iterations = it;
    rep.residual_norm = rnorm / bnorm;
    rep.converged = rep.residual_norm <= tol;
    rep.dirichlet_energy = stationary_energy(op, pot, b);
    if (!rep.converged)
        throw EllipticError("weighted Neumann solve did not converge, residual " +
                            std::to_string(rep.residual_norm));
    return {std::move(pot), rep};
}

double dirichlet_energy(const ScalarField& mu, const RegParams& params,
                        const ScalarField& u) {
    require_same_grid(*mu.grid, *u.grid);
    WeightedOperator op(mu, params.lambda);
    return op.energy(u);
}

}  // namespace otd
