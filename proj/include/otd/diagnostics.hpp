// Optimality-system residuals, the 1D cumulative-integral oracle, and a
// brute-force minimizer for tiny grids used to cross-check the flow and
// JKO paths.
#pragma once

#include "otd/energy.hpp"

#include <cstdint>

namespace otd {

struct DiagnosticsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResidualReport {
    double pde_residual = 0.0;     // ||div((mu+lambda)grad u) + f|| relative
    double eikonal_excess = 0.0;   // max over {mu = 0} of (|grad u|^2 - 1)^+
    double stationarity = 0.0;     // max over {mu > 0} of the stationarity defect
    double complementarity = 0.0;  // int mu (1-|grad u|)^+ + int mu (|grad u|-1)^+
};

// unregularized Monge-Kantorovich residuals (lambda = delta = 0); the
// stationarity entry is the eikonal defect | |grad u|^2 - 1 | on supp mu
ResidualReport mk_residuals(const Density& mu, const Potential& u,
                            const SourceData& f);

// residuals of the perturbed optimality system at lambda, delta > 0
ResidualReport regularized_residuals(const Density& mu, const Potential& u,
                                     const RegParams& params,
                                     const SourceData& f);

void write_residual_csv(std::ostream& os, const ResidualReport& r,
                        bool header = true);

// 1D closed form mu*(x) = |F(x)|, F = cumulative trapezoid integral of f
Density oracle_1d(const SourceData& f);

struct BruteForceResult {
    Density mu;
    std::vector<double> start_values;  // converged objective per start
    double best_value = 0.0;
    bool reproducible = false;  // best value hit by >= 3 starts within 1e-9
};

// multi-start box-constrained descent with central-difference gradients;
// independent of the grad_E / xi* implementation path
BruteForceResult brute_force_minimize(const RegParams& params,
                                      const SourceData& f,
                                      std::uint64_t seed = 1234,
                                      int n_starts = 6, int max_iter = 20000,
                                      double grad_tol = 1e-9);

}  // namespace otd
