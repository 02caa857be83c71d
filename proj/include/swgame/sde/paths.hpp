#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "swgame/model/problem.hpp"

namespace swgame {

// A seeded batch of Euler–Maruyama paths of X together with the Brownian
// increments that drove them.
struct PathBundle {
    double t0 = 0.0;
    std::vector<double> x0;
    std::size_t n_steps = 0;
    double dt = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    int dim_x = 1;
    int dim_w = 1;
    // [path][step][k], n_paths × n_steps × dim_w
    std::vector<double> increments;
    // [path][step][k], n_paths × (n_steps + 1) × dim_x
    std::vector<double> states;
    // Realized moments of all increment components; nominal values 0 and dt.
    double increment_mean = 0.0;
    double increment_variance = 0.0;

    [[nodiscard]] std::span<const double> state(std::size_t path, std::size_t step) const {
        return {states.data() + (path * (n_steps + 1) + step) * dim_x,
                static_cast<std::size_t>(dim_x)};
    }
    [[nodiscard]] std::span<const double> increment(std::size_t path, std::size_t step) const {
        return {increments.data() + (path * n_steps + step) * dim_w,
                static_cast<std::size_t>(dim_w)};
    }
    [[nodiscard]] double time(std::size_t step) const {
        return t0 + static_cast<double>(step) * dt;
    }
    [[nodiscard]] double horizon() const { return time(n_steps); }
};

struct SimulationOptions {
    unsigned threads = 1;
};

// X_{j+1} = X_j + b(t_j, X_j)·dt + σ(t_j, X_j)·ΔB_j on a uniform grid over
// [t0, T]. Increment (path, step, k) is the normal with index step·d + k of
// path `path` in the Philox stream keyed by `seed`.
PathBundle simulate_paths(const SwitchingProblem& problem, double t0, std::span<const double> x0,
                          std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                          SimulationOptions options = {});

// Sample estimate of E[sup_{s ≤ T} |X_s|^gamma] (Euclidean norm).
double moment_check(const PathBundle& bundle, int gamma);

// Binary dump, all fields little-endian:
//   char[4] "SWPB", u32 version (1), u32 dim_x, u32 dim_w, u64 n_paths,
//   u64 n_steps, u64 seed, f64 t0, f64 dt, f64 x0[dim_x],
//   f64 states[n_paths][n_steps + 1][dim_x].
// Increments are not stored; read_bundle regenerates nothing and leaves them empty.
void write_bundle(std::ostream& out, const PathBundle& bundle);
PathBundle read_bundle(std::istream& in);

}  // namespace swgame
