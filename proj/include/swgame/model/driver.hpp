#pragma once

#include <algorithm>
#include <span>

#include "swgame/model/problem.hpp"

namespace swgame {

// n·(y_i − [y_next − g_down])^− − m·(y_i − [y_next + g_up])^+
inline double penalty_term(double y_i, double y_next, double g_down, double g_up, double m,
                           double n) {
    const double below = std::max(-(y_i - (y_next - g_down)), 0.0);
    const double above = std::max(y_i - (y_next + g_up), 0.0);
    return n * below - m * above;
}

// f^{i,m,n}(t, x, ȳ) = f^i(t, x, ȳ) + n·(y^i − [y^{i+1} − g̲_{i,i+1}])^−
//                                   − m·(y^i − [y^{i+1} + ḡ_{i,i+1}])^+
double eval_penalized_driver(const SwitchingProblem& problem, int mode, double m, double n,
                             double t, std::span<const double> x, std::span<const double> y);

}  // namespace swgame
