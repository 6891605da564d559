#include "qdyn/config.hpp"

#include <cstdlib>
#include <set>

#include <json.hpp>

namespace qdyn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
    throw ParseError(what, path);
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail("expected a number", path);
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail("expected an integer", path);
    return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail("expected a boolean", path);
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail("expected a string", path);
    return j.get<std::string>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& prefix) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.contains(key)) fail("unknown key", prefix + key);
    }
}

ModelSpec default_model(const std::string& name, const std::string& path) {
    if (name == "ohmic") return OhmicDephasing{};
    if (name == "polarization") return PolarizationDephasing{};
    if (name == "jc") return JaynesCummings{};
    if (name == "pauli_tanh") return PauliTanh{};
    if (name == "pauli_tan") return PauliTan{};
    fail("unknown model '" + name + "'", path);
}

int default_jobs() {
    if (const char* env = std::getenv("QDYN_JOBS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

}  // namespace

void RunConfig::validate() const {
    qdyn::validate(model);
    initial.validate();
    if (!(t_max > 0.0)) throw DomainError("t_max must be > 0");
    if (n_points < 2) throw DomainError("n_points must be >= 2");
    if (!(tol.fd_step > 0.0) || !(tol.ode_tol > 0.0) ||
        !(tol.cp_epsilon > 0.0) || !(tol.blp_epsilon > 0.0))
        throw DomainError("all tolerances must be > 0");
    if (jobs < 1) throw DomainError("jobs must be >= 1");
    if (sweep) {
        if (sweep->points < 2) throw DomainError("sweep.points must be >= 2");
        if (!(sweep->hi > sweep->lo)) throw DomainError("sweep range is empty");
        get_parameter(model, sweep->parameter);  // throws if not a member
        // Model invariants hold on intervals, so feasible endpoints make the
        // whole range feasible.
        with_parameter(model, sweep->parameter, sweep->lo);
        with_parameter(model, sweep->parameter, sweep->hi);
    }
    for (const auto& p : distance_pairs) {
        p.a.validate();
        p.b.validate();
    }
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what(), "<document>");
    }
    if (!doc.is_object()) fail("top level must be an object", "<document>");
    if (!doc.contains("model")) fail("missing required key", "model");

    RunConfig cfg;
    cfg.jobs = default_jobs();
    cfg.model = default_model(as_string(doc["model"], "model"), "model");

    const auto model_params = parameter_names(cfg.model);
    std::set<std::string> allowed{"model",    "theta",      "phi",
                                  "t_max",    "n_points",   "sweep",
                                  "analysis", "out_dir",    "tolerances",
                                  "seed",     "distance_pairs", "jobs"};
    allowed.insert(model_params.begin(), model_params.end());
    reject_unknown(doc, allowed, "");

    for (const auto& name : model_params) {
        if (!doc.contains(name)) continue;
        try {
            cfg.model = with_parameter(cfg.model, name, as_number(doc[name], name));
        } catch (const DomainError& e) {
            fail(e.what(), name);
        }
    }

    if (doc.contains("theta")) cfg.initial.theta = as_number(doc["theta"], "theta");
    if (doc.contains("phi")) cfg.initial.phi = as_number(doc["phi"], "phi");
    if (doc.contains("t_max")) cfg.t_max = as_number(doc["t_max"], "t_max");
    if (doc.contains("n_points")) cfg.n_points = as_int(doc["n_points"], "n_points");
    if (doc.contains("out_dir")) cfg.out_dir = as_string(doc["out_dir"], "out_dir");
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer()) fail("expected an integer", "seed");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("jobs")) cfg.jobs = as_int(doc["jobs"], "jobs");

    if (doc.contains("sweep")) {
        const json& sj = doc["sweep"];
        if (!sj.is_object()) fail("expected an object", "sweep");
        reject_unknown(sj, {"parameter", "min", "max", "points"}, "sweep.");
        if (!sj.contains("parameter")) fail("missing required key", "sweep.parameter");
        SweepSpec sweep;
        sweep.parameter = as_string(sj["parameter"], "sweep.parameter");
        if (sj.contains("min")) sweep.lo = as_number(sj["min"], "sweep.min");
        if (sj.contains("max")) sweep.hi = as_number(sj["max"], "sweep.max");
        if (sj.contains("points")) sweep.points = as_int(sj["points"], "sweep.points");
        cfg.sweep = sweep;
    }

    if (doc.contains("analysis")) {
        const json& aj = doc["analysis"];
        if (!aj.is_object()) fail("expected an object", "analysis");
        reject_unknown(aj, {"speed", "blp", "divisibility"}, "analysis.");
        if (aj.contains("speed")) cfg.analysis.speed = as_bool(aj["speed"], "analysis.speed");
        if (aj.contains("blp")) cfg.analysis.blp = as_bool(aj["blp"], "analysis.blp");
        if (aj.contains("divisibility"))
            cfg.analysis.divisibility = as_bool(aj["divisibility"], "analysis.divisibility");
    }

    if (doc.contains("tolerances")) {
        const json& tj = doc["tolerances"];
        if (!tj.is_object()) fail("expected an object", "tolerances");
        reject_unknown(tj, {"fd_step", "ode_tol", "cp_epsilon", "blp_epsilon"},
                       "tolerances.");
        if (tj.contains("fd_step"))
            cfg.tol.fd_step = as_number(tj["fd_step"], "tolerances.fd_step");
        if (tj.contains("ode_tol"))
            cfg.tol.ode_tol = as_number(tj["ode_tol"], "tolerances.ode_tol");
        if (tj.contains("cp_epsilon"))
            cfg.tol.cp_epsilon = as_number(tj["cp_epsilon"], "tolerances.cp_epsilon");
        if (tj.contains("blp_epsilon"))
            cfg.tol.blp_epsilon = as_number(tj["blp_epsilon"], "tolerances.blp_epsilon");
    }

    if (doc.contains("distance_pairs")) {
        const json& pj = doc["distance_pairs"];
        if (!pj.is_array()) fail("expected an array", "distance_pairs");
        int index = 0;
        for (const auto& item : pj) {
            const std::string prefix = "distance_pairs[" + std::to_string(index) + "].";
            if (!item.is_object()) fail("expected an object", prefix);
            reject_unknown(item, {"theta1", "phi1", "theta2", "phi2"}, prefix);
            DistancePair pair;
            if (item.contains("theta1")) pair.a.theta = as_number(item["theta1"], prefix + "theta1");
            if (item.contains("phi1")) pair.a.phi = as_number(item["phi1"], prefix + "phi1");
            if (item.contains("theta2")) pair.b.theta = as_number(item["theta2"], prefix + "theta2");
            if (item.contains("phi2")) pair.b.phi = as_number(item["phi2"], prefix + "phi2");
            cfg.distance_pairs.push_back(pair);
            ++index;
        }
    }

    try {
        cfg.validate();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        fail(e.what(), "<config>");
    }
    return cfg;
}

}  // namespace qdyn
