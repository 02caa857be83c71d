#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace swgame {

// Which obstacles are enforced and in what order.
//   MinMax:    v^i = max(L^i, min(U^i, c^i))
//   MaxMin:    v^i = min(U^i, max(L^i, c^i))
//   LowerOnly: v^i = max(L^i, c^i)
//   UpperOnly: v^i = min(U^i, c^i)
// with L^i = v^{i+1} − g̲_i and U^i = v^{i+1} + ḡ_i (indices cyclic).
enum class ClampKind { MinMax, MaxMin, LowerOnly, UpperOnly };

enum class Regime : std::uint8_t { LowerContact, Interior, UpperContact };

const char* to_string(Regime r);

struct ClampResult {
    int sweeps = 0;
    double residual = 0.0;  // worst per-mode |residual| in the chosen orientation
};

// Gauss–Seidel over modes i = 0..p−1 starting from c until the largest change
// in a sweep drops below 1e−12·max(1, max|c|). max_sweeps ≤ 0 selects
// 10·p·(1 + range(c)/gap), where gap is min(g̲_i + ḡ_i) for two-sided kinds
// and the cycle sum of the enforced costs for one-sided kinds.
// Throws ConfigError on a non-positive gap and ConvergenceError on exhaustion.
ClampResult clamp_modes(std::span<const double> c, std::span<const double> g_down,
                        std::span<const double> g_up, std::span<double> v,
                        ClampKind kind = ClampKind::MinMax, int max_sweeps = 0);

std::vector<double> clamp_modes(std::span<const double> c, std::span<const double> g_down,
                                std::span<const double> g_up, ClampKind kind = ClampKind::MinMax);

// Per-mode residual of the obstacle equation, e.g. for MinMax
// min{v − L, max(v − U, v − c)}.
double clamp_residual(std::span<const double> v, std::span<const double> c,
                      std::span<const double> g_down, std::span<const double> g_up, int mode,
                      ClampKind kind);

// Exact comparisons; a value sitting on both obstacles is tagged lower contact.
Regime regime_of(double v, double v_next, double g_down, double g_up);

}  // namespace swgame
