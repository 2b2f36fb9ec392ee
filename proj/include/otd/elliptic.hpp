// Weighted Neumann solver: -div((mu+lambda)grad u) = f with zero-mean u.
// The operator is assembled edgewise from the same gradient/divergence pair
// as the rest of the discrete calculus, so its bilinear form and the
// Dirichlet energy agree stencil for stencil.
#pragma once

#include "otd/grid.hpp"

namespace otd {

struct EllipticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Regularization triple: conductivity floor lambda, Sobolev penalty delta,
// growth exponent p (> dim), conjugate q = p/(p-1).
struct RegParams {
    double lambda;
    double delta;
    double p;
    double q;

    RegParams(double lambda_, double delta_, double p_, int dim = 1)
        : lambda(lambda_), delta(delta_), p(p_), q(p_ / (p_ - 1.0)) {
        if (!(lambda > 0.0)) throw EllipticError("RegParams: lambda must be > 0");
        if (!(delta >= 0.0)) throw EllipticError("RegParams: delta must be >= 0");
        if (!(p > dim)) throw EllipticError("RegParams: p must exceed dim");
    }
};

struct Potential {
    ScalarField field;
};

struct SolveReport {
    int iterations = 0;
    double residual_norm = 0.0;  // relative to the rhs norm
    double dirichlet_energy = 0.0;
    bool converged = false;
};

// Symmetric PSD operator u -> -div(a grad u) with edge conductivity a given
// by the arithmetic mean of the nodal mu+lambda values. apply() returns the
// weak-form residual vector r_k = sum_e w_e a_e g_e(u) (+/-), i.e. W * A u.
class WeightedOperator {
  public:
    WeightedOperator(const ScalarField& mu, double lambda);

    const Grid& grid() const { return *grid_; }
    void apply(const std::vector<double>& u, std::vector<double>& out) const;
    double edge_conductivity(int a, int e) const { return a_[a][e]; }
    double energy(const ScalarField& u) const;  // int a |grad u|^2
    std::vector<double> diagonal() const;

  private:
    const Grid* grid_;
    std::array<std::vector<double>, 2> a_;
};

// guess, when given, warm-starts the conjugate-gradient iteration
std::pair<Potential, SolveReport> solve_weighted_neumann(
    const ScalarField& mu, const RegParams& params, const SourceData& f,
    double tol = 1e-10, int max_iter = 0, const Potential* guess = nullptr);

double dirichlet_energy(const ScalarField& mu, const RegParams& params,
                        const ScalarField& u);

}  // namespace otd
