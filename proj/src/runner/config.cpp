#include "kalinv/errors.hpp"
#include "kalinv/problems/analytic.hpp"
#include "kalinv/problems/lorenz.hpp"
#include "kalinv/runner.hpp"

#include <fstream>
#include <set>

namespace kalinv::runner {

namespace {

std::pair<std::string, std::string> split_problem(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) return {s, ""};
    return {s.substr(0, colon), s.substr(colon + 1)};
}

template <class T>
T get_as(const json& j, const std::string& field) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(field, "has the wrong type (" + std::string(j.type_name()) + ")");
    }
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "must be a number");
    return j.get<double>();
}

long get_integer(const json& j, const std::string& field) {
    if (j.is_number_integer()) return j.get<long>();
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v == static_cast<double>(static_cast<long>(v))) return static_cast<long>(v);
    }
    throw ConfigError(field, "must be an integer");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) throw ConfigError(prefix + it.key(), "is not a recognised field");
    }
}

json param_or(const json& params, const char* key, json fallback) {
    return params.contains(key) ? params.at(key) : fallback;
}

}  // namespace

Eigen::Index problem_dimension(const std::string& problem, const json& params) {
    const auto [name, variant] = split_problem(problem);
    const std::string pp = "problem_params.";
    if (!params.is_object()) throw ConfigError("problem_params", "must be an object");

    std::set<std::string> allowed = {"constraint"};
    Eigen::Index n = 0;
    if (name == "linear2") {
        if (!problems::parse_linear2_variant(variant)) throw ConfigError("problem", "linear2 variant must be NS, OD or UD");
        n = 2;
    } else if (name == "hilbert") {
        allowed.insert("n_theta");
        if (!variant.empty()) throw ConfigError("problem", "hilbert takes its size from problem_params.n_theta");
        n = get_integer(param_or(params, "n_theta", 10), pp + "n_theta");
        if (n < 1) throw ConfigError(pp + "n_theta", "must be at least 1");
    } else if (name == "darcy") {
        allowed.insert({"grid_n", "n_modes_truth", "n_theta"});
        const long grid = get_integer(param_or(params, "grid_n", 80), pp + "grid_n");
        const long truth = get_integer(param_or(params, "n_modes_truth", 256), pp + "n_modes_truth");
        n = get_integer(param_or(params, "n_theta", 32), pp + "n_theta");
        if (grid < 16) throw ConfigError(pp + "grid_n", "must be at least 16");
        if (truth < 1 || truth > 1088) throw ConfigError(pp + "n_modes_truth", "must lie in [1, 1088]");
        if (n < 1 || n > truth) throw ConfigError(pp + "n_theta", "must lie in [1, n_modes_truth]");
    } else if (name == "lorenz63") {
        allowed.insert({"dt", "spin_up", "window", "truth_windows"});
        const auto v = problems::parse_lorenz63_variant(variant);
        if (!v) throw ConfigError("problem", "lorenz63 variant must be one_param or three_param");
        n = *v == problems::Lorenz63Variant::OneParam ? 1 : 3;
        for (const char* key : {"dt", "window"}) {
            if (params.contains(key) && !(get_number(params.at(key), pp + key) > 0.0)) {
                throw ConfigError(pp + key, "must be positive");
            }
        }
        if (params.contains("spin_up") && !(get_number(params.at("spin_up"), pp + "spin_up") >= 0.0)) {
            throw ConfigError(pp + "spin_up", "must be non-negative");
        }
        if (params.contains("truth_windows") && get_integer(params.at("truth_windows"), pp + "truth_windows") < 2) {
            throw ConfigError(pp + "truth_windows", "must be at least 2");
        }
    } else if (name == "lorenz96") {
        allowed.insert({"window", "spin_up", "dt", "moments"});
        if (!variant.empty()) throw ConfigError("problem", "lorenz96 has no variants");
        n = 12;
        for (const char* key : {"dt", "window"}) {
            if (params.contains(key) && !(get_number(params.at(key), pp + key) > 0.0)) {
                throw ConfigError(pp + key, "must be positive");
            }
        }
        if (params.contains("spin_up") && !(get_number(params.at("spin_up"), pp + "spin_up") >= 0.0)) {
            throw ConfigError(pp + "spin_up", "must be non-negative");
        }
        if (params.contains("moments")) {
            const json& m = params.at("moments");
            if (!m.is_array() || m.empty()) throw ConfigError(pp + "moments", "must be a non-empty array of [k, power]");
            for (const json& e : m) {
                if (!e.is_array() || e.size() != 2) throw ConfigError(pp + "moments", "entries must be [k, power]");
                const long k = get_integer(e[0], pp + "moments");
                const long p = get_integer(e[1], pp + "moments");
                if (k < 1 || k > 8 || p < 1) throw ConfigError(pp + "moments", "need 1 <= k <= 8 and power >= 1");
            }
        }
    } else if (name == "logistic") {
        if (!variant.empty()) throw ConfigError("problem", "logistic has no variants");
        n = 2;
    } else {
        throw ConfigError("problem", "unknown problem '" + name + "'");
    }
    reject_unknown(params, allowed, pp);

    if (params.contains("constraint")) {
        const json& c = params.at("constraint");
        if (c.is_string()) {
            if (c.get<std::string>() != "nonneg") throw ConfigError(pp + "constraint", "must be \"nonneg\" or a box");
        } else if (c.is_object()) {
            reject_unknown(c, {"lower", "upper"}, pp + "constraint.");
            if (!c.contains("lower") || !c.contains("upper")) {
                throw ConfigError(pp + "constraint", "box needs lower and upper");
            }
            const auto lo = get_as<std::vector<double>>(c.at("lower"), pp + "constraint.lower");
            const auto hi = get_as<std::vector<double>>(c.at("upper"), pp + "constraint.upper");
            if (lo.size() != static_cast<std::size_t>(n) || hi.size() != static_cast<std::size_t>(n)) {
                throw ConfigError(pp + "constraint", "box bounds need n_theta entries");
            }
            for (std::size_t i = 0; i < lo.size(); ++i) {
                if (!(lo[i] < hi[i])) throw ConfigError(pp + "constraint", "box needs lower < upper");
            }
        } else {
            throw ConfigError(pp + "constraint", "must be \"nonneg\" or a box");
        }
    }
    return n;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "configuration must be an object");
    reject_unknown(j,
                   {"problem", "problem_params", "method", "alpha", "gamma", "n_iters", "ensemble_size",
                    "noise_level", "seed", "spread_a", "output_dir", "fd_jacobian", "uks"},
                   "");
    RunConfig c;
    if (j.contains("problem")) c.problem = get_as<std::string>(j.at("problem"), "problem");
    if (j.contains("problem_params")) c.problem_params = j.at("problem_params");
    const Eigen::Index n_theta = problem_dimension(c.problem, c.problem_params);
    const std::string name = split_problem(c.problem).first;

    if (j.contains("method")) c.method = get_as<std::string>(j.at("method"), "method");
    if (c.method != "uks" && !parse_method(c.method)) {
        throw ConfigError("method", "must be one of uki, eki, exki, kf, uks");
    }
    if (c.method == "kf") {
        if (name != "linear2" && name != "hilbert") throw ConfigError("method", "kf needs a linear problem");
        if (c.problem_params.contains("constraint")) throw ConfigError("method", "kf cannot be combined with a constraint");
    }

    if (j.contains("alpha")) c.alpha = get_number(j.at("alpha"), "alpha");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha", "alpha must lie in (0,1]");

    c.gamma = (name == "linear2" || name == "hilbert") && c.method != "uks" ? 0.25 : 1.0;
    if (j.contains("gamma")) c.gamma = get_number(j.at("gamma"), "gamma");
    if (!(c.gamma > 0.0)) throw ConfigError("gamma", "gamma must be positive");

    if (j.contains("n_iters")) c.n_iters = static_cast<int>(get_integer(j.at("n_iters"), "n_iters"));
    if (c.n_iters < 1) throw ConfigError("n_iters", "must be at least 1");

    c.ensemble_size = name == "darcy" ? 100 : static_cast<int>(2 * n_theta + 1);
    if (j.contains("ensemble_size")) c.ensemble_size = static_cast<int>(get_integer(j.at("ensemble_size"), "ensemble_size"));
    if (c.ensemble_size < 2) throw ConfigError("ensemble_size", "must be at least 2");

    if (j.contains("noise_level")) c.noise_level = get_number(j.at("noise_level"), "noise_level");
    if (!(c.noise_level >= 0.0)) throw ConfigError("noise_level", "must be non-negative");

    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long>() >= 0)) {
            throw ConfigError("seed", "must be a non-negative integer");
        }
        c.seed = j.at("seed").get<std::uint64_t>();
    }

    if (j.contains("spread_a") && !j.at("spread_a").is_null()) {
        c.spread_a = get_number(j.at("spread_a"), "spread_a");
        if (!(*c.spread_a > 0.0)) throw ConfigError("spread_a", "must be positive");
    }

    if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j.at("output_dir"), "output_dir");
    if (c.output_dir.empty()) throw ConfigError("output_dir", "is required");

    if (j.contains("fd_jacobian")) c.fd_jacobian = get_as<bool>(j.at("fd_jacobian"), "fd_jacobian");

    if (j.contains("uks")) {
        const json& u = j.at("uks");
        if (!u.is_object()) throw ConfigError("uks", "must be an object");
        reject_unknown(u, {"h", "t_end", "record_every"}, "uks.");
        if (u.contains("h")) c.uks.h = get_number(u.at("h"), "uks.h");
        if (u.contains("t_end")) c.uks.t_end = get_number(u.at("t_end"), "uks.t_end");
        if (u.contains("record_every")) c.uks.record_every = get_integer(u.at("record_every"), "uks.record_every");
    }
    if (!(c.uks.h > 0.0)) throw ConfigError("uks.h", "must be positive");
    if (!(c.uks.t_end > 0.0)) throw ConfigError("uks.t_end", "must be positive");
    if (c.uks.record_every < 1) throw ConfigError("uks.record_every", "must be at least 1");
    return c;
}

json RunConfig::to_json() const {
    json j;
    j["problem"] = problem;
    j["problem_params"] = problem_params;
    j["method"] = method;
    j["alpha"] = alpha;
    j["gamma"] = gamma;
    j["n_iters"] = n_iters;
    j["ensemble_size"] = ensemble_size;
    j["noise_level"] = noise_level;
    j["seed"] = seed;
    j["spread_a"] = spread_a ? json(*spread_a) : json(nullptr);
    j["output_dir"] = output_dir;
    j["fd_jacobian"] = fd_jacobian;
    j["uks"] = {{"h", uks.h}, {"t_end", uks.t_end}, {"record_every", uks.record_every}};
    return j;
}

json load_config_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("--config", "cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace kalinv::runner
