#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "swgame/model/problem.hpp"
#include "swgame/pde/solver.hpp"

namespace swgame {

// Fully resolved run configuration. Every field has a default; a config file
// only needs the keys it changes. The key schema is documented in README.md.
struct RunConfig {
    ProblemSpec problem;
    std::string problem_label = "standard";
    std::string problem_json;  // fully expanded function-family description
    double x0 = 0.0;

    struct Grid {
        int n_steps = 400;
        int n_x = 201;
        std::optional<double> x_min, x_max;  // default x0 ± 6·σ_max·√T
    } grid;

    struct Lattice {
        int n_steps = 400;
        double half_width = 3.0;
        int n_levels = 0;  // > 0 overrides half_width
        double lambda = 1.7320508075688772;
    } lattice;

    LadderSchedule ladder = LadderSchedule::doubling(6);

    struct MonteCarlo {
        std::size_t n_paths = 10000;
        int n_steps = 400;
        std::uint64_t seed = 1;
        std::size_t export_paths = 100;
        int basis_degree = 4;
        double m = 16.0;
        double n = 16.0;
    } monte_carlo;

    struct Audit {
        std::uint64_t seed = 7;
        int n_samples = 200;
        int n_t = 11;
    } audit;

    struct Game {
        int start_mode = 1;  // one-based
        int n_perturbations = 20;
        std::uint64_t seed = 11;
        double eps = -1.0;  // < 0: default from the field's clamp residual
    } game;

    struct Tolerances {
        double compare = 1e-9;
        double scheme = 5e-2;
        double se_multiplier = 3.0;
        double ladder_monotone = 1e-8;
    } tolerances;

    unsigned threads = 1;

    // The resolved configuration as pretty-printed JSON (manifest echo).
    [[nodiscard]] std::string resolved_json() const;
};

// Throws ConfigError with line/column for syntax errors and the key path for
// schema errors.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

GridSpec grid_spec(const RunConfig& config, const SwitchingProblem& problem);

}  // namespace swgame
