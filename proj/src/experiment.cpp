#include "otd/experiment.hpp"

#include "otd/diagnostics.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace otd {

namespace fs = std::filesystem;

Grid grid_from_spec(const GridSpec& spec) {
    return build_grid(spec.dim, spec.lo, spec.hi, spec.n);
}

Density initial_density(const Grid& g, const InitialSpec& spec,
                        std::uint64_t seed) {
    ScalarField v(g);
    if (spec.type == "constant") {
        for (int id = 0; id < g.n_total(); ++id)
            if (!g.is_boundary(id)) v[id] = spec.value;
    } else if (spec.type == "random") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int id = 0; id < g.n_total(); ++id)
            if (!g.is_boundary(id)) v[id] = spec.value * unif(rng);
    }
    return make_density(std::move(v));
}

namespace {

int default_K(const Grid& g) { return g.dim() == 1 ? 64 : 128; }

void write_residuals(const fs::path& p, const ResidualReport& r) {
    std::ofstream os(p);
    write_residual_csv(os, r);
}

int run_flow_mode(const ExperimentConfig& c, const Grid& g,
                  const SourceData& f, const fs::path& out) {
    RegParams params(c.reg.lambda, c.reg.delta, c.reg.p, g.dim());
    Density mu0 = initial_density(g, c.initial, c.seed);
    FlowResult res = run_flow(mu0, params, f, c.flow);
    write_trajectory_csv((out / "trajectory.csv").string(), res.records);
    write_field_csv((out / "final_field.csv").string(),
                    res.final_state.mu.field);
    write_residuals(out / "residuals.csv",
                    regularized_residuals(res.final_state.mu,
                                          res.final_state.u, params, f));
    std::cout << "flow: " << res.n_steps << " steps, converged="
              << res.converged << ", E=" << res.final_state.energy.total
              << ", xi_norm=" << res.final_state.xi_norm << "\n";
    if (!res.converged)
        std::cerr << "warning: flow did not reach xi_tol before t_max\n";
    return kExitOk;
}

int run_jko_mode(const ExperimentConfig& c, const Grid& g, const SourceData& f,
                 const fs::path& out) {
    RegParams params(c.reg.lambda, c.reg.delta, c.reg.p, g.dim());
    DwBasis basis = build_dw_basis(g, c.dw_K > 0 ? c.dw_K : default_K(g));
    JkoConfig jc;
    jc.tau_schedule = c.jko.tau_schedule;
    jc.inner_tol = c.jko.inner_tol;
    jc.inner_max_iter = c.jko.inner_max_iter;
    Density mu0 = initial_density(g, c.initial, c.seed);
    JkoResult res = run_jko(mu0, params, f, basis, jc);
    write_jko_csv((out / "trajectory.csv").string(), res.records);
    const Density& last = res.iterates.back();
    write_field_csv((out / "final_field.csv").string(), last.field);
    EnergyEval ev = evaluate(last, params, f);
    write_residuals(out / "residuals.csv",
                    regularized_residuals(last, ev.u, params, f));
    std::cout << "jko: " << res.reports.size() << " steps, E="
              << ev.energy.total << "\n";
    return kExitOk;
}

int run_sweep_mode(const ExperimentConfig& c, const Grid& g,
                   const SourceData& f, const fs::path& out) {
    if (g.dim() != 1) throw ConfigError("sweep mode needs a 1D grid (oracle)");
    DwBasis basis = build_dw_basis(g, c.dw_K > 0 ? c.dw_K : default_K(g));
    Density oracle = oracle_1d(f);

    std::ofstream os(out / "sweep_summary.csv");
    os.precision(17);
    os << "lambda,delta,E_total,dw_to_oracle,pde_residual,stationarity,"
          "eikonal_excess,complementarity,converged\n";

    // iterated limit: outer lambda down, inner delta down, warm-started
    Density warm = initial_density(g, c.initial, c.seed);
    int failures = 0;
    for (double lambda : c.sweep_lambdas) {
        for (double delta : c.sweep_deltas) {
            RegParams params(lambda, delta, c.reg.p, g.dim());
            try {
                FlowResult res = run_flow(warm, params, f, c.flow);
                const FlowState& fin = res.final_state;
                ResidualReport rr =
                    regularized_residuals(fin.mu, fin.u, params, f);
                os << lambda << ',' << delta << ',' << fin.energy.total << ','
                   << dw(fin.mu, oracle, basis) << ',' << rr.pde_residual
                   << ',' << rr.stationarity << ',' << rr.eikonal_excess << ','
                   << rr.complementarity << ',' << res.converged << '\n';
                warm = fin.mu;
            } catch (const std::exception& e) {
                std::cerr << "sweep cell (" << lambda << "," << delta
                          << ") failed: " << e.what() << "\n";
                os << lambda << ',' << delta << ",nan,nan,nan,nan,nan,nan,0\n";
                ++failures;
            }
        }
    }
    write_field_csv((out / "final_field.csv").string(), warm.field);
    std::cout << "sweep: " << c.sweep_lambdas.size() * c.sweep_deltas.size()
              << " cells, " << failures << " failures\n";
    return kExitOk;
}

int run_oracle_check_mode(const ExperimentConfig& c, const Grid& g,
                          const SourceData& f, const fs::path& out) {
    if (g.dim() != 1) throw ConfigError("oracle-check mode needs a 1D grid");
    RegParams params(c.reg.lambda, c.reg.delta, c.reg.p, g.dim());
    Density mu0 = initial_density(g, c.initial, c.seed);

    FlowResult flow_res = run_flow(mu0, params, f, c.flow);
    const Density& mu_flow = flow_res.final_state.mu;

    DwBasis basis = build_dw_basis(g, c.dw_K > 0 ? c.dw_K : default_K(g));
    JkoConfig jc;
    jc.tau_schedule = c.jko.tau_schedule.empty()
                          ? std::vector<double>(30, 0.5)
                          : c.jko.tau_schedule;
    jc.inner_tol = c.jko.inner_tol;
    jc.inner_max_iter = c.jko.inner_max_iter;
    JkoResult jko_res = run_jko(mu0, params, f, basis, jc);
    const Density& mu_jko = jko_res.iterates.back();

    BruteForceResult bf = brute_force_minimize(params, f, c.seed + 1);
    Density oracle = oracle_1d(f);

    auto linf = [](const Density& a, const Density& b) {
        double m = 0.0;
        for (int id = 0; id < a.field.size(); ++id)
            m = std::max(m, std::abs(a.field[id] - b.field[id]));
        return m;
    };

    std::ofstream os(out / "oracle_check.csv");
    os.precision(17);
    os << "pair,linf\n";
    os << "flow_vs_bruteforce," << linf(mu_flow, bf.mu) << "\n";
    os << "jko_vs_bruteforce," << linf(mu_jko, bf.mu) << "\n";
    os << "flow_vs_jko," << linf(mu_flow, mu_jko) << "\n";
    os << "flow_vs_oracle," << linf(mu_flow, oracle) << "\n";
    os << "bruteforce_reproducible," << (bf.reproducible ? 1 : 0) << "\n";

    write_field_csv((out / "flow_field.csv").string(), mu_flow.field);
    write_field_csv((out / "bruteforce_field.csv").string(), bf.mu.field);
    write_field_csv((out / "oracle_field.csv").string(), oracle.field);
    std::cout << "oracle-check: flow/bf " << linf(mu_flow, bf.mu)
              << ", jko/bf " << linf(mu_jko, bf.mu) << "\n";
    return kExitOk;
}

}  // namespace

int run_experiment(const ExperimentConfig& c) {
    try {
        Grid g = grid_from_spec(c.grid);
        SourceData f = make_source(g, c.source_boxes, c.allow_mean_correction);
        fs::path out(c.output_dir);
        fs::create_directories(out);
        switch (c.mode) {
            case Mode::flow: return run_flow_mode(c, g, f, out);
            case Mode::jko: return run_jko_mode(c, g, f, out);
            case Mode::sweep: return run_sweep_mode(c, g, f, out);
            case Mode::oracle_check: return run_oracle_check_mode(c, g, f, out);
        }
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GridError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace otd
