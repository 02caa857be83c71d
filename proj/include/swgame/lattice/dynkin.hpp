#pragma once

#include <cstdint>
#include <vector>

namespace swgame {

// Single-mode stopping game on a recombining binomial tree with M steps.
// Node (j, k), k = 0..j, moves to (j+1, k+1) with probability q and to
// (j+1, k) otherwise. Arrays for j < M are indexed j·(j+1)/2 + k.
struct TinyDynkinGame {
    int M = 1;
    double q = 0.5;
    std::vector<double> terminal;  // M + 1 values at j = M
    std::vector<double> reward;    // collected at every non-stopped node before T
    std::vector<double> lower;     // L, paid when the maximizer stops first (σ ≤ τ)
    std::vector<double> upper;     // U, paid when the minimizer stops first (τ < σ)

    [[nodiscard]] static std::size_t node(int j, int k) {
        return static_cast<std::size_t>(j) * (j + 1) / 2 + k;
    }
    [[nodiscard]] std::size_t interior_nodes() const { return node(M, 0); }
};

struct DynkinValues {
    double enumerated = 0.0;  // inf over τ-rules of sup over σ-rules
    double recursion = 0.0;   // V = max(L, min(U, r + E V))
};

// Exhaustive enumeration of node-indexed stopping rules for both players.
// Refuses (ConfigError) when the rule-pair count 2^(2N) exceeds 2^20, with
// N = M(M+1)/2, and when the obstacles are not strictly separated.
DynkinValues enumerate_dynkin_value(const TinyDynkinGame& game);

// The clamp recursion alone.
double dynkin_recursion(const TinyDynkinGame& game);

}  // namespace swgame
