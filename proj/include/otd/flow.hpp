// Explicit clamped Euler integration of mu' = -xi*(mu) down to stationarity,
// with Armijo backtracking and energy-identity accounting.
#pragma once

#include "otd/energy.hpp"

namespace otd {

struct FlowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FlowState {
    double t = 0.0;
    Density mu;
    Potential u;  // elliptic solution cached for (mu, lambda, f)
    EnergyBreakdown energy;
    double xi_norm = 0.0;  // ||xi*(mu)||_{L^2}
};

enum class DtControl { fixed, backtracking };

struct FlowConfig {
    double dt0 = 0.1;
    DtControl dt_control = DtControl::backtracking;
    double t_max = 1e4;
    double xi_tol = 1e-6;
    int record_every = 10;
    double solve_tol = 1e-10;
    double sigma = 0.1;  // Armijo slope fraction
};

FlowState init_flow_state(const Density& mu0, const RegParams& params,
                          const SourceData& f, double solve_tol = 1e-10);

// one clamped Euler step at the given dt (no acceptance test)
FlowState flow_step(const FlowState& state, double dt, const RegParams& params,
                    const SourceData& f, double solve_tol = 1e-10);

// backtracking step: halves dt until the Armijo decrease holds; returns the
// accepted dt. Throws FlowError when dt underflows below 1e-14.
FlowState flow_step_backtracking(const FlowState& state, double& dt,
                                 const RegParams& params, const SourceData& f,
                                 const FlowConfig& cfg);

struct FlowRecord {
    double t, E_total, L, M, sobolev, xi_norm, mass, dt;
};

struct FlowResult {
    std::vector<FlowRecord> records;
    FlowState final_state;
    bool converged = false;
    int n_steps = 0;
    double dissipation = 0.0;  // sum of dt * ||xi*||^2 over accepted steps
};

FlowResult run_flow(const Density& mu0, const RegParams& params,
                    const SourceData& f, const FlowConfig& cfg);

void write_trajectory_csv(std::ostream& os, const std::vector<FlowRecord>& rows);
void write_trajectory_csv(const std::string& path,
                          const std::vector<FlowRecord>& rows);

}  // namespace otd
