#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "swgame/model/families.hpp"
#include "swgame/model/problem.hpp"

namespace swgame::testing {

// One-dimensional problem with constant coefficients and constant costs.
struct Spec1d {
    int p = 2;
    double T = 1.0;
    double b = 0.0;
    double sigma = 0.0;
    std::vector<double> f;   // constant reward per mode (default 0)
    std::vector<double> h;   // constant terminal per mode (default 0)
    std::vector<double> gd;  // g̲ per transition (default 1)
    std::vector<double> gu;  // ḡ per transition (default 1)
};

inline ProblemSpec make_spec(const Spec1d& s) {
    ProblemSpec out;
    out.modes = s.p;
    out.horizon = s.T;
    out.drift = families::affine_drift(s.b, 0.0);
    out.vol = families::constant_vol(s.sigma);
    auto pick = [](const std::vector<double>& v, int i, double d) {
        return v.empty() ? d : v[static_cast<std::size_t>(i)];
    };
    for (int i = 0; i < s.p; ++i) {
        out.running_reward.push_back(families::polynomial_reward({pick(s.f, i, 0.0)}));
        out.terminal.push_back(families::polynomial_terminal({pick(s.h, i, 0.0)}));
        out.cost_down.push_back(families::constant_cost(pick(s.gd, i, 1.0)));
        out.cost_up.push_back(families::constant_cost(pick(s.gu, i, 1.0)));
    }
    out.growth_exponent = 0;
    out.reward_uses_values = false;
    return out;
}

inline Tagged<RewardFn> reward_fn(RewardFn fn, std::string tag = "test") {
    return {std::move(fn), std::move(tag)};
}
inline Tagged<TerminalFn> terminal_fn(TerminalFn fn, std::string tag = "test") {
    return {std::move(fn), std::move(tag)};
}
inline Tagged<CostFn> cost_fn(CostFn fn, std::string tag = "test") {
    return {std::move(fn), std::move(tag)};
}

inline std::string fixture(const std::string& name) {
    return std::string(SWGAME_FIXTURE_DIR) + "/" + name;
}

}  // namespace swgame::testing
