#include "swgame/model/fixtures.hpp"

#include "swgame/model/families.hpp"

namespace swgame::fixtures {

namespace {

ProblemSpec standard_with_coupling(double weight) {
    ProblemSpec s;
    s.modes = 3;
    s.horizon = 1.0;
    s.drift = families::affine_drift(0.2, -0.2);
    s.vol = families::constant_vol(0.5);
    const double offsets[] = {0.0, 0.2, 0.1};
    for (int i = 0; i < s.modes; ++i) {
        std::vector<double> w;
        if (weight != 0.0) w.assign(s.modes, weight);
        s.running_reward.push_back(
            families::cosine_reward(1.0, 1.0, static_cast<double>(i + 1), w, -10.0));
        s.terminal.push_back(families::polynomial_terminal({offsets[i], 0.5}));
        s.cost_down.push_back(families::constant_cost(0.3));
        s.cost_up.push_back(families::constant_cost(0.3));
    }
    s.growth_exponent = 1;
    s.reward_uses_values = weight != 0.0;
    return s;
}

}  // namespace

ProblemSpec standard_spec() { return standard_with_coupling(0.1); }

ProblemSpec game_spec() { return standard_with_coupling(0.0); }

ProblemSpec deterministic_spec(double h1, double h2, double cost) {
    ProblemSpec s;
    s.modes = 2;
    s.horizon = 1.0;
    s.drift = families::affine_drift(0.0, 0.0);
    s.vol = families::constant_vol(0.0);
    for (int i = 0; i < 2; ++i) {
        s.running_reward.push_back(families::polynomial_reward({0.0}));
        s.cost_down.push_back(families::constant_cost(cost));
        s.cost_up.push_back(families::constant_cost(cost));
    }
    s.terminal.push_back(families::polynomial_terminal({h1}));
    s.terminal.push_back(families::polynomial_terminal({h2}));
    s.growth_exponent = 0;
    s.reward_uses_values = false;
    return s;
}

ProblemSpec with_constant_costs(ProblemSpec spec, double value) {
    for (auto& c : spec.cost_down) c = families::constant_cost(value);
    for (auto& c : spec.cost_up) c = families::constant_cost(value);
    return spec;
}

}  // namespace swgame::fixtures
