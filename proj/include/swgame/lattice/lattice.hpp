#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "swgame/model/problem.hpp"
#include "swgame/lattice/clamp.hpp"
#include "swgame/value_field.hpp"

namespace swgame {

struct LatticeOptions {
    double lambda = 1.7320508075688772;  // dx = λ·σ_max·√dt
    double dx = 0.0;                     // > 0 overrides the λ rule
};

// Recombining trinomial chain on a fixed x-grid x_k = x_center + (k − (n−1)/2)·dx.
// Boundary nodes reflect: node 0 moves "down" to node 1, node n−1 moves "up" to n−2.
struct Lattice {
    double t0 = 0.0;
    double horizon = 1.0;
    int n_steps = 1;
    double dt = 0.0;
    double dx = 0.0;
    double x_center = 0.0;
    int n_levels = 1;
    std::vector<double> x;
    // [step][node], steps 0..n_steps−1
    std::vector<double> p_up, p_mid, p_down;

    [[nodiscard]] std::size_t at(int j, int k) const {
        return static_cast<std::size_t>(j) * n_levels + k;
    }
    [[nodiscard]] TimeGrid time_grid() const { return {t0, horizon, n_steps}; }
    [[nodiscard]] SpaceGrid space_grid() const {
        return {x.front(), x.back(), n_levels};
    }
};

// Moment-matched probabilities: p_up − p_down = b·dt/dx,
// p_up + p_down = (σ²·dt + (b·dt)²)/dx². Throws InfeasibleLatticeError naming
// the node if any probability leaves [0,1].
Lattice build_lattice(const SwitchingProblem& problem, double t0, double x_center, int n_steps,
                      int n_levels, LatticeOptions options = {});

// Number of levels covering x_center ± half_width with the lattice's own dx.
int levels_for_half_width(const SwitchingProblem& problem, double t0, double x_center,
                          int n_steps, double half_width, LatticeOptions options = {});

struct InductionOptions {
    double tol_picard = 1e-10;
    int max_picard = 200;
    ClampKind kind = ClampKind::MinMax;
    unsigned threads = 1;
};

struct LatticeValues {
    ValueField field;               // grid = lattice levels, provenance lattice
    std::vector<Regime> tags;       // same indexing as field values
    int max_clamp_sweeps = 0;

    [[nodiscard]] Regime tag(int j, int k, int i) const {
        return tags[(static_cast<std::size_t>(j) * field.space().n + k) * field.modes() + i];
    }
};

// Terminal slice h^i; earlier slices: c^i = E[V^i(t_{j+1})] + f^i(t_j, x, V(t_{j+1}, x))·dt,
// clamp, then f re-evaluated at the clamped same-slice values until stable.
// Throws ConvergenceError with the slice index if the refinement does not settle.
LatticeValues backward_induct(const SwitchingProblem& problem, const Lattice& lattice,
                              InductionOptions options = {});

// CSV: t_index,x_index,mode,value,regime_tag (mode one-based).
void write_lattice_csv(const std::filesystem::path& path, const LatticeValues& values);

}  // namespace swgame
