#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "swgame/game/control.hpp"
#include "swgame/sde/paths.hpp"

namespace swgame {

struct SwitchEvent {
    int step = 0;
    double time = 0.0;  // ρ_n
    int from = 0;       // θ_{n−1}, zero-based
    int to = 0;         // θ_n
    Player who = Player::C1;
    double cost = 0.0;
    double net_cost = 0.0;  // C_N = A − B after this event
};

struct GameTranscript {
    std::size_t path = 0;
    int start_mode = 0;
    int final_mode = 0;
    std::vector<SwitchEvent> events;
    double reward_integral = 0.0;  // left-endpoint Σ f^{θ}(t_k, X_k)·dt
    double terminal = 0.0;         // h^{θ_T}(X_T)
    double cost_c1 = 0.0;          // A^u_T
    double cost_c2 = 0.0;          // B^v_T

    [[nodiscard]] double net_cost() const { return cost_c1 - cost_c2; }  // C_∞
    [[nodiscard]] double payoff() const { return terminal + reward_integral - net_cost(); }
};

struct CouplingOptions {
    long max_switches = 0;  // 0 selects 10·p·M
    unsigned threads = 1;
};

// Plays u (owned by C1) against v (owned by C2) along one path of the bundle.
// At each grid step before T the players are polled repeatedly: C1 first (a
// tie goes to the maximizer), then C2, until neither wants to switch. Explicit
// times are rounded to the nearest grid step; a pending time fires at the
// first step at or after it. Rewards use ȳ = 0.
// Throws NonAdmissibleError when the switch budget is exhausted.
GameTranscript couple_controls(const SwitchingProblem& problem, const Control& u, const Control& v,
                               int start_mode, const PathBundle& bundle, std::size_t path,
                               CouplingOptions options = {});

std::vector<GameTranscript> play_game(const SwitchingProblem& problem, const Control& u,
                                      const Control& v, int start_mode, const PathBundle& bundle,
                                      CouplingOptions options = {});

struct PayoffEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    double mean_events = 0.0;
    double a_second_moment = 0.0;  // E[(A^u_T)²], integrability bookkeeping only
    double b_second_moment = 0.0;
};

PayoffEstimate payoff(const std::vector<GameTranscript>& transcripts);

// One JSON object per line: path, start/final mode (one-based), events, totals.
void write_transcripts(const std::filesystem::path& path,
                       const std::vector<GameTranscript>& transcripts);

}  // namespace swgame
