#include "swgame/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swgame/errors.hpp"
#include "swgame/model/families.hpp"

namespace swgame {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& source, const std::string& key, const std::string& msg) {
    throw ConfigError(source + ": key '" + key + "': " + msg);
}

// Typed lookup that names the key path on failure.
template <class T>
T get(const json& obj, const std::string& key, const std::string& path, const std::string& src) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) fail(src, full, "missing");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(src, full, "has the wrong type (" + std::string(obj.at(key).type_name()) + ")");
    }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& path,
         const std::string& src) {
    if (!obj.contains(key)) return fallback;
    return get<T>(obj, key, path, src);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path,
                const std::string& src) {
    if (!obj.is_object()) fail(src, path, "must be an object");
    for (const auto& [k, v] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) fail(src, path.empty() ? k : path + "." + k, "unknown key");
    }
}

json preset(const std::string& name, const std::string& src) {
    auto constant = [](double v) { return json{{"family", "constant"}, {"value", v}}; };
    if (name == "standard" || name == "game") {
        const double w = name == "standard" ? 0.1 : 0.0;
        json rewards = json::array(), terminals = json::array();
        const double offsets[] = {0.0, 0.2, 0.1};
        for (int i = 0; i < 3; ++i) {
            json r = {{"family", "cosine"}, {"amplitude", 1.0}, {"frequency", 1.0},
                      {"phase", static_cast<double>(i + 1)}};
            if (w != 0.0) {
                r["y_weights"] = {w, w, w};
                r["y_floor"] = -10.0;
            }
            rewards.push_back(r);
            terminals.push_back({{"family", "polynomial"}, {"coeffs", {offsets[i], 0.5}}});
        }
        return {{"modes", 3},
                {"horizon", 1.0},
                {"growth_exponent", 1},
                {"drift", {{"family", "affine"}, {"a", 0.2}, {"c", -0.2}}},
                {"vol", {{"family", "constant"}, {"sigma", 0.5}}},
                {"rewards", rewards},
                {"terminals", terminals},
                {"cost_down", constant(0.3)},
                {"cost_up", constant(0.3)}};
    }
    if (name == "deterministic") {
        return {{"modes", 2},
                {"horizon", 1.0},
                {"growth_exponent", 0},
                {"drift", {{"family", "affine"}, {"a", 0.0}, {"c", 0.0}}},
                {"vol", {{"family", "constant"}, {"sigma", 0.0}}},
                {"rewards", {{"family", "polynomial"}, {"coeffs", {0.0}}}},
                {"terminals",
                 {{{"family", "polynomial"}, {"coeffs", {0.0}}},
                  {{"family", "polynomial"}, {"coeffs", {10.0}}}}},
                {"cost_down", constant(1.0)},
                {"cost_up", constant(1.0)}};
    }
    fail(src, "problem.preset", "unknown preset '" + name + "' (standard, game, deterministic)");
}

Tagged<CoefficientFn> parse_drift(const json& j, const std::string& path, const std::string& src) {
    const auto fam = get<std::string>(j, "family", path, src);
    if (fam == "affine") {
        check_keys(j, {"family", "a", "c"}, path, src);
        return families::affine_drift(get_or(j, "a", 0.0, path, src), get_or(j, "c", 0.0, path, src));
    }
    fail(src, path + ".family", "unknown drift family '" + fam + "' (affine)");
}

Tagged<CoefficientFn> parse_vol(const json& j, const std::string& path, const std::string& src) {
    const auto fam = get<std::string>(j, "family", path, src);
    if (fam == "constant") {
        check_keys(j, {"family", "sigma"}, path, src);
        return families::constant_vol(get<double>(j, "sigma", path, src));
    }
    if (fam == "affine") {
        check_keys(j, {"family", "a", "c"}, path, src);
        return families::affine_vol(get_or(j, "a", 0.0, path, src), get_or(j, "c", 0.0, path, src));
    }
    fail(src, path + ".family", "unknown vol family '" + fam + "' (constant, affine)");
}

Tagged<RewardFn> parse_reward(const json& j, const std::string& path, const std::string& src,
                              bool& uses_y) {
    const auto fam = get<std::string>(j, "family", path, src);
    const auto w = get_or(j, "y_weights", std::vector<double>{}, path, src);
    const double floor =
        get_or(j, "y_floor", -std::numeric_limits<double>::infinity(), path, src);
    for (double x : w) uses_y = uses_y || x != 0.0;
    if (fam == "polynomial") {
        check_keys(j, {"family", "coeffs", "y_weights", "y_floor"}, path, src);
        return families::polynomial_reward(get<std::vector<double>>(j, "coeffs", path, src), w,
                                           floor);
    }
    if (fam == "cosine") {
        check_keys(j, {"family", "amplitude", "frequency", "phase", "y_weights", "y_floor"}, path,
                   src);
        return families::cosine_reward(get_or(j, "amplitude", 1.0, path, src),
                                       get_or(j, "frequency", 1.0, path, src),
                                       get_or(j, "phase", 0.0, path, src), w, floor);
    }
    fail(src, path + ".family", "unknown reward family '" + fam + "' (polynomial, cosine)");
}

Tagged<TerminalFn> parse_terminal(const json& j, const std::string& path, const std::string& src) {
    const auto fam = get<std::string>(j, "family", path, src);
    if (fam == "polynomial") {
        check_keys(j, {"family", "coeffs"}, path, src);
        return families::polynomial_terminal(get<std::vector<double>>(j, "coeffs", path, src));
    }
    fail(src, path + ".family", "unknown terminal family '" + fam + "' (polynomial)");
}

Tagged<CostFn> parse_cost(const json& j, const std::string& path, const std::string& src) {
    const auto fam = get<std::string>(j, "family", path, src);
    if (fam == "constant") {
        check_keys(j, {"family", "value"}, path, src);
        return families::constant_cost(get<double>(j, "value", path, src));
    }
    if (fam == "affine") {
        check_keys(j, {"family", "a", "ct", "cx"}, path, src);
        return families::affine_cost(get_or(j, "a", 0.0, path, src), get_or(j, "ct", 0.0, path, src),
                                     get_or(j, "cx", 0.0, path, src));
    }
    fail(src, path + ".family", "unknown cost family '" + fam + "' (constant, affine)");
}

// A per-mode list, or one object shared by every mode.
template <class F>
auto per_mode(const json& prob, const char* key, int p, const std::string& src, F&& parse) {
    const std::string path = std::string("problem.") + key;
    if (!prob.contains(key)) fail(src, path, "missing");
    const json& v = prob.at(key);
    std::vector<decltype(parse(v, path))> out;
    if (v.is_object()) {
        for (int i = 0; i < p; ++i) out.push_back(parse(v, path));
    } else if (v.is_array()) {
        if (static_cast<int>(v.size()) != p)
            fail(src, path, "has " + std::to_string(v.size()) + " entries, expected " +
                                std::to_string(p) + " (one per mode)");
        for (int i = 0; i < p; ++i)
            out.push_back(parse(v.at(i), path + "[" + std::to_string(i) + "]"));
    } else {
        fail(src, path, "must be an object or an array");
    }
    return out;
}

ProblemSpec build_problem(const json& prob, const std::string& src) {
    check_keys(prob, {"modes", "horizon", "growth_exponent", "drift", "vol", "rewards", "terminals",
                      "cost_down", "cost_up"},
               "problem", src);
    ProblemSpec s;
    s.modes = get<int>(prob, "modes", "problem", src);
    if (s.modes < 2) fail(src, "problem.modes", "must be >= 2");
    s.horizon = get<double>(prob, "horizon", "problem", src);
    s.growth_exponent = get_or(prob, "growth_exponent", 1, "problem", src);
    s.drift = parse_drift(prob.at("drift"), "problem.drift", src);
    s.vol = parse_vol(prob.at("vol"), "problem.vol", src);
    bool uses_y = false;
    s.running_reward = per_mode(prob, "rewards", s.modes, src, [&](const json& j, const std::string& p) {
        return parse_reward(j, p, src, uses_y);
    });
    s.reward_uses_values = uses_y;
    s.terminal = per_mode(prob, "terminals", s.modes, src,
                          [&](const json& j, const std::string& p) { return parse_terminal(j, p, src); });
    s.cost_down = per_mode(prob, "cost_down", s.modes, src,
                           [&](const json& j, const std::string& p) { return parse_cost(j, p, src); });
    s.cost_up = per_mode(prob, "cost_up", s.modes, src,
                         [&](const json& j, const std::string& p) { return parse_cost(j, p, src); });
    return s;
}

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t a = 0; a < byte && a < text.size(); ++a) {
        if (text[a] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& src) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(src + ": " + line_col(text, e.byte) + ": syntax error: " + e.what());
    }
    check_keys(root, {"problem", "x0", "grid", "lattice", "ladder", "monte_carlo", "audit", "game",
                      "tolerances", "threads"},
               "", src);
    RunConfig c;

    json prob = preset("standard", src);
    if (root.contains("problem")) {
        const json& p = root.at("problem");
        if (!p.is_object()) fail(src, "problem", "must be an object");
        if (p.contains("preset")) {
            c.problem_label = get<std::string>(p, "preset", "problem", src);
            prob = preset(c.problem_label, src);
        } else {
            c.problem_label = get_or(p, "label", std::string("custom"), "problem", src);
        }
        for (const auto& [k, v] : p.items())
            if (k != "preset" && k != "label") prob[k] = v;
    }
    c.problem = build_problem(prob, src);
    c.problem_json = prob.dump();
    try {
        SwitchingProblem check(c.problem);
    } catch (const ConfigError& e) {
        throw ConfigError(src + ": problem: " + e.what());
    }

    c.x0 = get_or(root, "x0", 0.0, "", src);
    if (root.contains("grid")) {
        const json& g = root.at("grid");
        check_keys(g, {"n_steps", "n_x", "x_min", "x_max"}, "grid", src);
        c.grid.n_steps = get_or(g, "n_steps", c.grid.n_steps, "grid", src);
        c.grid.n_x = get_or(g, "n_x", c.grid.n_x, "grid", src);
        if (g.contains("x_min")) c.grid.x_min = get<double>(g, "x_min", "grid", src);
        if (g.contains("x_max")) c.grid.x_max = get<double>(g, "x_max", "grid", src);
        if (c.grid.x_min.has_value() != c.grid.x_max.has_value())
            fail(src, "grid", "give both x_min and x_max or neither");
    }
    if (c.grid.n_steps < 1) fail(src, "grid.n_steps", "must be >= 1");
    if (c.grid.n_x < 3) fail(src, "grid.n_x", "must be >= 3");
    if (root.contains("lattice")) {
        const json& l = root.at("lattice");
        check_keys(l, {"n_steps", "half_width", "n_levels", "lambda"}, "lattice", src);
        c.lattice.n_steps = get_or(l, "n_steps", c.lattice.n_steps, "lattice", src);
        c.lattice.half_width = get_or(l, "half_width", c.lattice.half_width, "lattice", src);
        c.lattice.n_levels = get_or(l, "n_levels", c.lattice.n_levels, "lattice", src);
        c.lattice.lambda = get_or(l, "lambda", c.lattice.lambda, "lattice", src);
    }
    if (root.contains("ladder")) {
        const json& l = root.at("ladder");
        check_keys(l, {"penalties", "inner", "tolerance", "max_rungs"}, "ladder", src);
        c.ladder.penalties = get_or(l, "penalties", c.ladder.penalties, "ladder", src);
        c.ladder.inner = get_or(l, "inner", c.ladder.inner, "ladder", src);
        c.ladder.tolerance = get_or(l, "tolerance", c.ladder.tolerance, "ladder", src);
        c.ladder.max_rungs = get_or(l, "max_rungs", c.ladder.max_rungs, "ladder", src);
        try {
            c.ladder.validate();
        } catch (const ConfigError& e) {
            fail(src, "ladder", e.what());
        }
    }
    if (root.contains("monte_carlo")) {
        const json& m = root.at("monte_carlo");
        check_keys(m, {"n_paths", "n_steps", "seed", "export_paths", "basis_degree", "m", "n"},
                   "monte_carlo", src);
        auto& mc = c.monte_carlo;
        mc.n_paths = get_or(m, "n_paths", mc.n_paths, "monte_carlo", src);
        mc.n_steps = get_or(m, "n_steps", mc.n_steps, "monte_carlo", src);
        mc.seed = get_or(m, "seed", mc.seed, "monte_carlo", src);
        mc.export_paths = get_or(m, "export_paths", mc.export_paths, "monte_carlo", src);
        mc.basis_degree = get_or(m, "basis_degree", mc.basis_degree, "monte_carlo", src);
        mc.m = get_or(m, "m", mc.m, "monte_carlo", src);
        mc.n = get_or(m, "n", mc.n, "monte_carlo", src);
    }
    if (c.monte_carlo.n_paths < 1) fail(src, "monte_carlo.n_paths", "must be >= 1");
    if (c.monte_carlo.n_steps < 1) fail(src, "monte_carlo.n_steps", "must be >= 1");
    if (root.contains("audit")) {
        const json& a = root.at("audit");
        check_keys(a, {"seed", "n_samples", "n_t"}, "audit", src);
        c.audit.seed = get_or(a, "seed", c.audit.seed, "audit", src);
        c.audit.n_samples = get_or(a, "n_samples", c.audit.n_samples, "audit", src);
        c.audit.n_t = get_or(a, "n_t", c.audit.n_t, "audit", src);
    }
    if (c.audit.n_samples < 2) fail(src, "audit.n_samples", "must be >= 2");
    if (c.audit.n_t < 1) fail(src, "audit.n_t", "must be >= 1");
    if (root.contains("game")) {
        const json& g = root.at("game");
        check_keys(g, {"start_mode", "n_perturbations", "seed", "eps"}, "game", src);
        c.game.start_mode = get_or(g, "start_mode", c.game.start_mode, "game", src);
        c.game.n_perturbations = get_or(g, "n_perturbations", c.game.n_perturbations, "game", src);
        c.game.seed = get_or(g, "seed", c.game.seed, "game", src);
        c.game.eps = get_or(g, "eps", c.game.eps, "game", src);
    }
    if (c.game.start_mode < 1 || c.game.start_mode > c.problem.modes)
        fail(src, "game.start_mode", "must lie in 1.." + std::to_string(c.problem.modes));
    if (root.contains("tolerances")) {
        const json& t = root.at("tolerances");
        check_keys(t, {"compare", "scheme", "se_multiplier", "ladder_monotone"}, "tolerances", src);
        c.tolerances.compare = get_or(t, "compare", c.tolerances.compare, "tolerances", src);
        c.tolerances.scheme = get_or(t, "scheme", c.tolerances.scheme, "tolerances", src);
        c.tolerances.se_multiplier =
            get_or(t, "se_multiplier", c.tolerances.se_multiplier, "tolerances", src);
        c.tolerances.ladder_monotone =
            get_or(t, "ladder_monotone", c.tolerances.ladder_monotone, "tolerances", src);
    }
    c.ladder.monotone_tolerance = c.tolerances.ladder_monotone;
    c.threads = get_or(root, "threads", 1u, "", src);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::string RunConfig::resolved_json() const {
    json j;
    j["problem"] = json::parse(problem_json);
    j["problem"]["label"] = problem_label;
    j["x0"] = x0;
    j["grid"] = {{"n_steps", grid.n_steps}, {"n_x", grid.n_x}};
    if (grid.x_min) {
        j["grid"]["x_min"] = *grid.x_min;
        j["grid"]["x_max"] = *grid.x_max;
    }
    j["lattice"] = {{"n_steps", lattice.n_steps},
                    {"half_width", lattice.half_width},
                    {"n_levels", lattice.n_levels},
                    {"lambda", lattice.lambda}};
    j["ladder"] = {{"penalties", ladder.penalties},
                   {"inner", ladder.inner},
                   {"tolerance", ladder.tolerance},
                   {"max_rungs", ladder.max_rungs}};
    j["monte_carlo"] = {{"n_paths", monte_carlo.n_paths},
                        {"n_steps", monte_carlo.n_steps},
                        {"seed", monte_carlo.seed},
                        {"export_paths", monte_carlo.export_paths},
                        {"basis_degree", monte_carlo.basis_degree},
                        {"m", monte_carlo.m},
                        {"n", monte_carlo.n}};
    j["audit"] = {{"seed", audit.seed}, {"n_samples", audit.n_samples}, {"n_t", audit.n_t}};
    j["game"] = {{"start_mode", game.start_mode},
                 {"n_perturbations", game.n_perturbations},
                 {"seed", game.seed},
                 {"eps", game.eps}};
    j["tolerances"] = {{"compare", tolerances.compare},
                       {"scheme", tolerances.scheme},
                       {"se_multiplier", tolerances.se_multiplier},
                       {"ladder_monotone", tolerances.ladder_monotone}};
    // threads is left out on purpose: worker count never changes results.
    return j.dump(2);
}

GridSpec grid_spec(const RunConfig& c, const SwitchingProblem& problem) {
    GridSpec g = default_grid(problem, c.x0, c.grid.n_steps, c.grid.n_x);
    if (c.grid.x_min) g.space = {*c.grid.x_min, *c.grid.x_max, c.grid.n_x};
    g.threads = c.threads;
    return g;
}

}  // namespace swgame
