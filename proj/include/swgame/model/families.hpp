#pragma once

#include <limits>
#include <vector>

#include "swgame/model/problem.hpp"

// Named one-dimensional function families used by fixtures and configs.
namespace swgame::families {

// b(t,x) = a + c·x
Tagged<CoefficientFn> affine_drift(double a, double c);
// σ(t,x) = a + c·x as a 1 × 1 matrix.
Tagged<CoefficientFn> affine_vol(double a, double c);
Tagged<CoefficientFn> constant_vol(double sigma);

// Σ_k coeffs[k]·x^k + Σ_l y_weights[l]·max(y^l, y_floor). Empty weights mean
// no ȳ-dependence.
Tagged<RewardFn> polynomial_reward(std::vector<double> coeffs, std::vector<double> y_weights = {},
                                   double y_floor = -std::numeric_limits<double>::infinity());
// amplitude·cos(frequency·x + phase) + Σ_l y_weights[l]·max(y^l, y_floor)
Tagged<RewardFn> cosine_reward(double amplitude, double frequency, double phase,
                               std::vector<double> y_weights = {},
                               double y_floor = -std::numeric_limits<double>::infinity());

// Σ_k coeffs[k]·x^k
Tagged<TerminalFn> polynomial_terminal(std::vector<double> coeffs);

Tagged<CostFn> constant_cost(double value);
// a + ct·t + cx·x
Tagged<CostFn> affine_cost(double a, double ct, double cx);

}  // namespace swgame::families
