#include "otd/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace otd {

using nlohmann::json;

Mode parse_mode(const std::string& s) {
    if (s == "flow") return Mode::flow;
    if (s == "jko") return Mode::jko;
    if (s == "sweep") return Mode::sweep;
    if (s == "oracle-check") return Mode::oracle_check;
    throw ConfigError("unknown mode '" + s + "'");
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::flow: return "flow";
        case Mode::jko: return "jko";
        case Mode::sweep: return "sweep";
        case Mode::oracle_check: return "oracle-check";
    }
    return "?";
}

namespace {

template <class T, std::size_t N>
std::array<T, N> to_array(const json& j, const char* what) {
    if (!j.is_array() || j.size() < 1 || j.size() > N)
        throw ConfigError(std::string(what) + ": expected array of length <= 2");
    std::array<T, N> out{};
    for (std::size_t i = 0; i < j.size(); ++i) out[i] = j[i].get<T>();
    return out;
}

void check_decreasing_positive(const std::vector<double>& v, const char* what) {
    if (v.empty()) throw ConfigError(std::string(what) + ": empty list");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0))
            throw ConfigError(std::string(what) + ": entries must be positive");
        if (i > 0 && !(v[i] < v[i - 1]))
            throw ConfigError(std::string(what) +
                              ": entries must be strictly decreasing");
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    try {
        ExperimentConfig c;
        c.schema_version = j.at("schema_version").get<int>();
        if (c.schema_version != 1)
            throw ConfigError("unsupported schema_version");
        c.mode = parse_mode(j.at("mode").get<std::string>());

        const json& jg = j.at("grid");
        c.grid.dim = jg.at("dim").get<int>();
        c.grid.lo = to_array<double, 2>(jg.at("lo"), "grid.lo");
        c.grid.hi = to_array<double, 2>(jg.at("hi"), "grid.hi");
        c.grid.n = to_array<int, 2>(jg.at("n"), "grid.n");

        const json& js = j.at("source");
        for (const json& jb : js.at("boxes")) {
            SourceBox b;
            b.lo = to_array<double, 2>(jb.at("lo"), "source box lo");
            b.hi = to_array<double, 2>(jb.at("hi"), "source box hi");
            b.value = jb.at("value").get<double>();
            c.source_boxes.push_back(b);
        }
        c.allow_mean_correction = js.value("allow_mean_correction", false);

        if (j.contains("initial")) {
            c.initial.type = j["initial"].value("type", "constant");
            c.initial.value = j["initial"].value("value", 0.5);
            if (c.initial.type != "zero" && c.initial.type != "constant" &&
                c.initial.type != "random")
                throw ConfigError("initial.type must be zero|constant|random");
        }

        const json& jr = j.at("reg");
        c.reg.lambda = jr.at("lambda").get<double>();
        c.reg.delta = jr.at("delta").get<double>();
        c.reg.p = jr.at("p").get<double>();

        if (j.contains("flow")) {
            const json& jf = j["flow"];
            c.flow.dt0 = jf.value("dt0", 0.1);
            const std::string ctrl = jf.value("dt_control", "backtracking");
            if (ctrl == "fixed")
                c.flow.dt_control = DtControl::fixed;
            else if (ctrl == "backtracking")
                c.flow.dt_control = DtControl::backtracking;
            else
                throw ConfigError("flow.dt_control must be fixed|backtracking");
            c.flow.t_max = jf.value("t_max", 1e4);
            c.flow.xi_tol = jf.value("xi_tol", 1e-6);
            c.flow.record_every = jf.value("record_every", 10);
            c.flow.solve_tol = jf.value("solve_tol", 1e-10);
            if (!(c.flow.dt0 > 0.0)) throw ConfigError("flow.dt0 must be > 0");
            if (!(c.flow.xi_tol > 0.0))
                throw ConfigError("flow.xi_tol must be > 0");
        } else if (c.mode == Mode::flow || c.mode == Mode::sweep) {
            throw ConfigError("mode requires a 'flow' section");
        }

        if (j.contains("jko")) {
            const json& jj = j["jko"];
            if (jj.contains("tau_schedule")) {
                c.jko.tau_schedule =
                    jj["tau_schedule"].get<std::vector<double>>();
            } else {
                const double tau = jj.at("tau").get<double>();
                const int n = jj.at("n_steps").get<int>();
                if (n < 1) throw ConfigError("jko.n_steps must be >= 1");
                c.jko.tau_schedule.assign(n, tau);
            }
            for (double t : c.jko.tau_schedule)
                if (!(t > 0.0)) throw ConfigError("jko taus must be > 0");
            c.jko.inner_tol = jj.value("inner_tol", 1e-8);
            c.jko.inner_max_iter = jj.value("inner_max_iter", 500);
        } else if (c.mode == Mode::jko) {
            throw ConfigError("mode jko requires a 'jko' section");
        }

        if (j.contains("dw")) c.dw_K = j["dw"].value("K", 0);

        if (c.mode == Mode::sweep) {
            const json& jw = j.at("sweep");
            c.sweep_lambdas = jw.at("lambdas").get<std::vector<double>>();
            c.sweep_deltas = jw.at("deltas").get<std::vector<double>>();
            check_decreasing_positive(c.sweep_lambdas, "sweep.lambdas");
            check_decreasing_positive(c.sweep_deltas, "sweep.deltas");
        }

        c.output_dir = j.value("output_dir", "out");
        c.seed = j.value("seed", std::uint64_t{0});
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

}  // namespace otd
