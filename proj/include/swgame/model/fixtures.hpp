#pragma once

#include "swgame/model/problem.hpp"

// Reference problems shared by tests, the acceptance suite and the CLI presets.
namespace swgame::fixtures {

// p = 3, b = 0.2(1 − x), σ = 0.5, T = 1,
// f^i = cos(x + i) + 0.1·Σ_l max(y^l, −10) (i one-based),
// h^i = 0.5x + a_i with a = (0, 0.2, 0.1), g̲ = ḡ = 0.3.
ProblemSpec standard_spec();

// standard_spec() without the ȳ-coupling in f, so the game payoff is defined.
ProblemSpec game_spec();

// p = 2, b = σ = 0, f = 0, h = (h1, h2), every cost equal to `cost`.
ProblemSpec deterministic_spec(double h1 = 0.0, double h2 = 10.0, double cost = 1.0);

// Replaces every switching cost by `value` (e.g. 1e6 to make switching irrelevant).
ProblemSpec with_constant_costs(ProblemSpec spec, double value);

}  // namespace swgame::fixtures
