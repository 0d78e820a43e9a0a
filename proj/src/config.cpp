#include "neardiag/config.hpp"

#include <cmath>
#include <initializer_list>

#include <json.hpp>

#include "neardiag/errors.hpp"

namespace neardiag {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known)
            throw invalid_input("config: unknown key '" + item.key() + "' in " + where);
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end())
        throw invalid_input("config: missing key '" + std::string(key) + "' in " + where);
    return *it;
}

double as_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw invalid_input("config: '" + what + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw invalid_input("config: '" + what + "' must be finite");
    return d;
}

std::uint64_t as_uint(const json& v, const std::string& what) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw invalid_input("config: '" + what + "' must be a nonnegative integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        throw invalid_input("config: '" + what + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

RealMatrix as_matrix(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty())
        throw invalid_input("config: '" + what + "' must be a nonempty array of rows");
    const std::size_t rows = v.size();
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) throw invalid_input("config: '" + what + "' rows must be nonempty arrays");
    RealVector data;
    data.reserve(rows * cols);
    for (const json& row : v) {
        if (!row.is_array() || row.size() != cols)
            throw invalid_input("config: '" + what + "' must be rectangular");
        for (const json& cell : row) data.push_back(as_number(cell, what));
    }
    return RealMatrix(rows, cols, std::move(data));
}

SolverOptions parse_solver(const json& obj) {
    reject_unknown_keys(obj,
                        {"dt", "t_end", "epsilon", "gap_tol", "seed", "decay_factor",
                         "blowup_cap", "realify", "n_trials", "n_samples", "bound_scale",
                         "hurwitz_margin", "cond_cap"},
                        "solver");
    SolverOptions s;
    if (obj.contains("dt")) s.dt = as_number(obj["dt"], "solver.dt");
    if (obj.contains("t_end")) s.t_end = as_number(obj["t_end"], "solver.t_end");
    if (obj.contains("epsilon")) s.epsilon = as_number(obj["epsilon"], "solver.epsilon");
    if (obj.contains("gap_tol")) s.gap_tol = as_number(obj["gap_tol"], "solver.gap_tol");
    if (obj.contains("seed")) s.seed = as_uint(obj["seed"], "solver.seed");
    if (obj.contains("decay_factor"))
        s.decay_factor = as_number(obj["decay_factor"], "solver.decay_factor");
    if (obj.contains("blowup_cap"))
        s.blowup_cap = as_number(obj["blowup_cap"], "solver.blowup_cap");
    if (obj.contains("realify")) {
        if (!obj["realify"].is_boolean())
            throw invalid_input("config: 'solver.realify' must be a boolean");
        s.realify = obj["realify"].get<bool>();
    }
    if (obj.contains("n_trials")) s.n_trials = as_uint(obj["n_trials"], "solver.n_trials");
    if (obj.contains("n_samples")) s.n_samples = as_uint(obj["n_samples"], "solver.n_samples");
    if (obj.contains("bound_scale"))
        s.bound_scale = as_number(obj["bound_scale"], "solver.bound_scale");
    if (obj.contains("hurwitz_margin"))
        s.hurwitz_margin = as_number(obj["hurwitz_margin"], "solver.hurwitz_margin");
    if (obj.contains("cond_cap")) s.cond_cap = as_number(obj["cond_cap"], "solver.cond_cap");
    return s;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw invalid_input(std::string("config: not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw invalid_input("config: top level must be an object");
    reject_unknown_keys(root, {"a", "f", "schedule", "horizon_end", "x0", "solver"},
                        "the top level");

    RealMatrix a = as_matrix(require(root, "a", "the top level"), "a");
    RealMatrix f = as_matrix(require(root, "f", "the top level"), "f");
    if (!a.square() || !f.square() || a.rows() != f.rows())
        throw invalid_input("config: 'a' and 'f' must be square with equal order");

    const json& sched_json = require(root, "schedule", "the top level");
    if (!sched_json.is_array() || sched_json.empty())
        throw invalid_input("config: 'schedule' must be a nonempty array of segments");
    std::vector<ScheduleSegment> segments;
    segments.reserve(sched_json.size());
    for (std::size_t k = 0; k < sched_json.size(); ++k) {
        const json& seg = sched_json[k];
        const std::string where = "schedule[" + std::to_string(k) + "]";
        if (!seg.is_object()) throw invalid_input("config: " + where + " must be an object");
        reject_unknown_keys(seg, {"t_start", "weights"}, where);
        const double t_start = as_number(require(seg, "t_start", where), where + ".t_start");
        RealMatrix w = as_matrix(require(seg, "weights", where), where + ".weights");
        if (!w.square()) throw invalid_input("config: " + where + ".weights must be square");
        segments.push_back({t_start, WeightedDigraph(w.rows(), w.data())});
    }
    const double horizon = as_number(require(root, "horizon_end", "the top level"), "horizon_end");
    TopologySchedule schedule(std::move(segments), horizon);

    const std::size_t n = schedule.agent_count();
    const std::size_t d = a.rows();

    bool x0_random = true;
    RealVector x0;
    if (root.contains("x0")) {
        const json& v = root["x0"];
        if (v.is_string()) {
            if (v.get<std::string>() != "random")
                throw invalid_input("config: 'x0' must be an array or the string \"random\"");
        } else if (v.is_array()) {
            x0_random = false;
            x0.reserve(v.size());
            for (const json& cell : v) x0.push_back(as_number(cell, "x0"));
            if (x0.size() != n * d)
                throw invalid_input("config: 'x0' must have length N*d = " +
                                    std::to_string(n * d));
        } else {
            throw invalid_input("config: 'x0' must be an array or the string \"random\"");
        }
    }

    SolverOptions solver;
    if (root.contains("solver")) {
        if (!root["solver"].is_object())
            throw invalid_input("config: 'solver' must be an object");
        solver = parse_solver(root["solver"]);
    }
    validate_solver(solver);

    return ScenarioConfig{std::move(a), std::move(f), std::move(schedule),
                          x0_random, std::move(x0), solver};
}

void validate_solver(const SolverOptions& s) {
    if (!(s.dt > 0.0)) throw invalid_input("config: 'solver.dt' must be positive");
    if (!(s.t_end >= s.dt)) throw invalid_input("config: 'solver.t_end' must be at least dt");
    if (!(s.epsilon > 0.0)) throw invalid_input("config: 'solver.epsilon' must be positive");
    if (!(s.gap_tol >= 0.0)) throw invalid_input("config: 'solver.gap_tol' must be >= 0");
    if (!(s.decay_factor > 0.0 && s.decay_factor < 1.0))
        throw invalid_input("config: 'solver.decay_factor' must be in (0, 1)");
    if (!(s.blowup_cap > 1.0))
        throw invalid_input("config: 'solver.blowup_cap' must exceed 1");
    if (s.n_trials == 0) throw invalid_input("config: 'solver.n_trials' must be >= 1");
    if (s.n_samples == 0) throw invalid_input("config: 'solver.n_samples' must be >= 1");
    if (!(s.bound_scale >= 0.0))
        throw invalid_input("config: 'solver.bound_scale' must be >= 0");
    if (!(s.hurwitz_margin >= 0.0))
        throw invalid_input("config: 'solver.hurwitz_margin' must be >= 0");
    if (!(s.cond_cap > 1.0)) throw invalid_input("config: 'solver.cond_cap' must exceed 1");
}

}  // namespace neardiag
