// The regularized transport energy E_{lambda,delta}, its exact discrete
// gradient, the p-Laplacian, and the minimal subgradient xi*.
#pragma once

#include "otd/elliptic.hpp"
#include "otd/grid.hpp"

namespace otd {

struct EnergyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Nonnegative density with zero trace (the discrete W^{1,p}_0 cone). The
// discrete support {mu > 0} is read off against eps_supp = eps_rel * max(mu).
struct Density {
    ScalarField field;
    double eps_rel = 1e-10;

    double eps_supp() const { return eps_rel * max_abs(field); }
    bool in_support(int id) const { return field[id] > eps_supp(); }
};

// validates nonnegativity and zero boundary values
Density make_density(ScalarField f, double eps_rel = 1e-10);
// clamps negatives to zero and forces boundary zeros (used by the flow)
Density project_density(ScalarField f, double eps_rel = 1e-10);
Density zero_density(const Grid& g);

struct EnergyBreakdown {
    double L = 0.0;        // Dirichlet/dual term L_lambda(mu)
    double M = 0.0;        // total mass
    double sobolev = 0.0;  // delta * ||grad mu||_p^p
    double total = 0.0;    // (L + M) + sobolev, fixed summation order
};

struct EnergyEval {
    EnergyBreakdown energy;
    Potential u;
    SolveReport report;
};

// full evaluation: one elliptic solve, energy split, cached potential
EnergyEval evaluate(const Density& mu, const RegParams& params,
                    const SourceData& f, double tol = 1e-10,
                    const Potential* guess = nullptr);
EnergyBreakdown eval_energy(const Density& mu, const RegParams& params,
                            const SourceData& f, double tol = 1e-10);

// |grad u|^2 carried back to nodes by edge-weight averaging of the squared
// midpoint gradients; exactly the derivative of the Dirichlet form in mu
ScalarField nodal_grad_sq(const ScalarField& u);

// discrete ||grad mu||_p^p over all edges (componentwise in 2D)
double sobolev_pp(const ScalarField& mu, double p);

// div(|grad mu|^{p-2} grad mu) at interior nodes, zero on the boundary
ScalarField p_laplacian(const Density& mu, double p);

// Frechet gradient 1 - |grad u_mu|^2 - delta p Lap_p mu
ScalarField grad_E(const Density& mu, const RegParams& params,
                   const SourceData& f, double tol = 1e-10);
ScalarField grad_E_at(const Density& mu, const RegParams& params,
                      const Potential& u);

// least-norm subgradient: grad_E on {mu > eps_supp}, -(1-|grad u|^2)^- on
// the rest of the interior, zero on boundary nodes
ScalarField minimal_subgradient(const Density& mu, const RegParams& params,
                                const SourceData& f, double tol = 1e-10);
ScalarField minimal_subgradient_at(const Density& mu, const RegParams& params,
                                   const Potential& u);

}  // namespace otd
