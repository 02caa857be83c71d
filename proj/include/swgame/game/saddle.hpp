#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "swgame/game/engine.hpp"

namespace swgame {

struct SaddlePair {
    Control u;  // C1
    Control v;  // C2
    double eps = 0.0;
};

// max(1e-9, 2·clamp residual recorded in the field).
double default_contact_eps(const ValueField& field);

// Hitting rules for both players from a direct or lattice field. eps < 0
// selects default_contact_eps. Throws ConfigError if both contact conditions
// hold at some node (eps too large for the cost gap) or if the provenance is
// penalized, ladder or bsde.
SaddlePair synthesize_saddle(std::shared_ptr<const SwitchingProblem> problem,
                             std::shared_ptr<const ValueField> field, int start_mode,
                             double eps = -1.0);

// The responder's own hitting rule; the opponent's switches enter through
// couple_controls when the two are played against each other.
Control best_response(std::shared_ptr<const SwitchingProblem> problem,
                      std::shared_ptr<const ValueField> field, const Control& opponent,
                      Player responder, int start_mode, double eps = -1.0);

struct SaddleOptions {
    double scheme_tolerance = 5e-2;
    double se_multiplier = 3.0;
    double eps = -1.0;
    CouplingOptions coupling;
};

struct PerturbationResult {
    Player deviator = Player::C1;
    std::string description;
    PayoffEstimate estimate;
    double se = 0.0;      // √(SE_perturbed² + SE_saddle²)
    double excess = 0.0;  // J(u,v*) − J* for C1, J* − J(u*,v) for C2; ≤ 0 when the saddle holds
    bool violates = false;
    bool strictly_worse = false;  // excess < −k·SE
};

struct SaddleReport {
    int start_mode = 0;
    double x0 = 0.0;
    double field_value = 0.0;  // v^i(t0, x0)
    PayoffEstimate saddle;     // J(u*, v*)
    bool value_ok = false;
    std::vector<PerturbationResult> perturbations;

    [[nodiscard]] int violations() const;
    [[nodiscard]] int strictly_worse() const;
    [[nodiscard]] bool saddle_ok() const { return violations() == 0; }
    [[nodiscard]] bool passed() const { return value_ok && saddle_ok(); }
    [[nodiscard]] std::string to_text() const;
    void write_csv(const std::filesystem::path& path) const;
};

// J(u*,v*) against v^i(t0, x0), then n_perturbations deviations per side.
// Even-numbered deviations are 1–3 random explicit times; odd-numbered ones
// are the saddle rule plus 1–2 extra random times.
SaddleReport saddle_audit(std::shared_ptr<const SwitchingProblem> problem,
                          std::shared_ptr<const ValueField> field, const PathBundle& bundle,
                          int start_mode, int n_perturbations, std::uint64_t seed,
                          SaddleOptions options = {});

}  // namespace swgame
