#pragma once

#include <span>
#include <vector>

#include "swgame/lattice/clamp.hpp"
#include "swgame/model/problem.hpp"
#include "swgame/value_field.hpp"

namespace swgame {

struct GridSpec {
    TimeGrid time;
    SpaceGrid space;
    unsigned threads = 1;
    double tol_picard = 1e-10;
    int max_picard = 200;
};

// x0 ± 6·σ_max·√(T − t0), σ_max sampled over the time grid on that domain.
GridSpec default_grid(const SwitchingProblem& problem, double x0, int n_steps, int n_x,
                      double t0 = 0.0);

// Three-point stencil of dt·𝓛 at one time slice: node k maps to
// lo[k]·w_{k−1} + mid[k]·w_k + hi[k]·w_{k+1}. Interior rows use the central
// second difference and upwind first difference; boundary rows drop the
// second difference and keep only inward-pointing drift.
struct ParabolicStencil {
    std::vector<double> lo, mid, hi;
    double worst_ratio = 0.0;  // max dt·(σ²/dx² + |b|/dx) over nodes
    double worst_x = 0.0;
};

ParabolicStencil parabolic_stencil(const SwitchingProblem& problem, const GridSpec& grid, int j);

// Throws CflError when ratio + dt·(m + n) exceeds 1 anywhere.
void check_cfl(const ParabolicStencil& st, const GridSpec& grid, double m = 0.0, double n = 0.0);

// c^i = w^i + dt·[½σ²·D²w^i + b·Dw^i + f^i(t_j, x, w(x))] for a slice laid
// out as w[k·p + i]. Throws CflError on an unstable grid.
std::vector<double> step_parabolic(std::span<const double> w, const SwitchingProblem& problem,
                                   const GridSpec& grid, int j);

// Backward loop with per-node clamp and same-slice Picard refinement of f.
ValueField solve_minmax(const SwitchingProblem& problem, const GridSpec& grid);
ValueField solve_maxmin(const SwitchingProblem& problem, const GridSpec& grid);

// Explicit stepping with the penalized driver f^{i,m,n} at next-slice values, no clamp.
ValueField solve_penalized(const SwitchingProblem& problem, const GridSpec& grid, double m,
                           double n);

enum class LadderDirection { Decreasing, Increasing };

// One ladder rung. Decreasing: clamp at L only, driver f − m(w^i − w^{i+1} − ḡ)^+.
// Increasing: clamp at U only, driver f + n(w^i − w^{i+1} + g̲)^−.
// Penalties use next-slice values, f is Picard-refined at same-slice values.
ValueField solve_reflected_penalized(const SwitchingProblem& problem, const GridSpec& grid,
                                     LadderDirection direction, double penalty);

struct LadderSchedule {
    std::vector<double> penalties;  // strictly increasing
    std::vector<double> inner;      // fixed opposite penalty for the BSDE ladder (first entry)
    double tolerance = 1e-8;        // stop once the Cauchy gap between rungs falls below this
    int max_rungs = 64;
    double monotone_tolerance = 1e-8;

    // 1, 2, 4, …, 2^J
    static LadderSchedule doubling(int J);
    void validate() const;
};

struct LadderResult {
    std::vector<ValueField> rungs;
    ValueField limit;
    std::vector<double> cauchy_gaps;  // sup gap between consecutive rungs
};

// Throws SchemeOrderError when a rung breaks monotonicity by more than the tolerance.
LadderResult run_ladder(const SwitchingProblem& problem, const GridSpec& grid,
                        const LadderSchedule& schedule, LadderDirection direction);

}  // namespace swgame
