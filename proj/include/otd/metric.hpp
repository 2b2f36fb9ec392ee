// The weak-* moment metric d_w and minimizing-movement (JKO) stepping for
// the regularized transport energy.
#pragma once

#include "otd/energy.hpp"

#include <cmath>

namespace otd {

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncated test-function family: phi_0 = 1, then tensor cosine modes by
// increasing total frequency, each with sup-norm 1, weighted by 2^{-k}.
struct DwBasis {
    const Grid* grid = nullptr;
    std::vector<ScalarField> phis;
    std::vector<double> weights;

    int K() const { return static_cast<int>(phis.size()); }
    // bound on the dropped tail of d_w^2 for measures with given total masses
    double tail_bound(double mass_a, double mass_b) const {
        const double s = mass_a + mass_b;
        return std::ldexp(s * s, 1 - K());
    }
};

DwBasis build_dw_basis(const Grid& g, int K);

std::vector<double> dw_moments(const ScalarField& mu, const DwBasis& basis);
double dw2(const ScalarField& mu, const ScalarField& nu, const DwBasis& basis);
double dw(const ScalarField& mu, const ScalarField& nu, const DwBasis& basis);
inline double dw(const Density& mu, const Density& nu, const DwBasis& b) {
    return dw(mu.field, nu.field, b);
}

struct JkoConfig {
    std::vector<double> tau_schedule;
    double inner_tol = 1e-8;       // projected-gradient norm target
    int inner_max_iter = 500;
    double solve_tol = 1e-10;
};

struct JkoStepReport {
    int iterations = 0;
    double objective = 0.0;       // E(nu) + d_w^2(mu_k,nu)/2tau at the iterate
    double grad_norm = 0.0;       // projected-gradient norm at exit
    double dw_increment = 0.0;    // d_w(mu_k, nu)
    EnergyBreakdown energy;       // E at the iterate
    bool converged = false;
};

// one proximal step: argmin_nu E_{lambda,delta}(nu) + d_w(mu_k,nu)^2/(2 tau)
// over the nonnegative zero-trace cone, by projected gradient descent with
// backtracking started at nu = mu_k (so the competitor bound always holds)
std::pair<Density, JkoStepReport> jko_step(const Density& mu_k, double tau,
                                           const RegParams& params,
                                           const SourceData& f,
                                           const DwBasis& basis,
                                           const JkoConfig& cfg);

struct JkoRecord {
    double t, E_total, L, M, sobolev, grad_norm, mass, tau, dw_inc;
};

struct JkoResult {
    std::vector<Density> iterates;  // mu_0 .. mu_n
    std::vector<JkoRecord> records;
    std::vector<JkoStepReport> reports;
};

JkoResult run_jko(const Density& mu0, const RegParams& params,
                  const SourceData& f, const DwBasis& basis,
                  const JkoConfig& cfg);

// per-step EVI defect along a JKO chain against a fixed competitor nu:
//   (d_w^2(mu_{k+1},nu) - d_w^2(mu_k,nu)) / (2 tau_k) - (E(nu) - E(mu_{k+1}))
std::vector<double> evi_residual(const JkoResult& chain, const Density& nu,
                                 const RegParams& params, const SourceData& f,
                                 const DwBasis& basis,
                                 const std::vector<double>& taus);
double violation_fraction(const std::vector<double>& residuals, double tol);

void write_jko_csv(std::ostream& os, const std::vector<JkoRecord>& rows);
void write_jko_csv(const std::string& path, const std::vector<JkoRecord>& rows);

}  // namespace otd
