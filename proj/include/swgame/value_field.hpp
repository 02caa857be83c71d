#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace swgame {

// Uniform grid t_j = t0 + j·dt, j = 0..n_steps, dt = (horizon − t0)/n_steps.
struct TimeGrid {
    double t0 = 0.0;
    double horizon = 1.0;
    int n_steps = 1;

    [[nodiscard]] double dt() const { return (horizon - t0) / n_steps; }
    [[nodiscard]] double time(int j) const { return j == n_steps ? horizon : t0 + j * dt(); }
    bool operator==(const TimeGrid&) const = default;
};

// Uniform grid of n points on [x_min, x_max]; n = 1 means the single point x_min = x_max.
struct SpaceGrid {
    double x_min = -1.0;
    double x_max = 1.0;
    int n = 2;

    [[nodiscard]] double dx() const { return n > 1 ? (x_max - x_min) / (n - 1) : 0.0; }
    [[nodiscard]] double x(int k) const { return k == n - 1 ? x_max : x_min + k * dx(); }
    [[nodiscard]] std::vector<double> points() const;
    // Index of the grid point closest to x (ends clamp).
    [[nodiscard]] int nearest(double x) const;
    bool operator==(const SpaceGrid&) const = default;
};

enum class Provenance {
    DirectMinmax,
    DirectMaxmin,
    Penalized,
    LadderDecreasing,
    LadderIncreasing,
    Lattice,
    Bsde,
};

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct FieldMeta {
    Provenance provenance = Provenance::DirectMinmax;
    double m = 0.0;  // penalty weights, meaningful for penalized and ladder fields
    double n = 0.0;
    double cfl_ratio = 0.0;       // worst dt·(σ²/dx² + |b|/dx + m + n)
    double clamp_residual = 0.0;  // worst |residual| of the per-node obstacle equations
    int max_picard = 0;           // most same-slice Picard iterations in any slice
};

// p value surfaces on a (time, x) grid. values[(j·n_x + k)·p + i].
class ValueField {
public:
    ValueField() = default;
    ValueField(TimeGrid time, SpaceGrid space, int modes, FieldMeta meta = {});

    [[nodiscard]] const TimeGrid& time() const { return time_; }
    [[nodiscard]] const SpaceGrid& space() const { return space_; }
    [[nodiscard]] int modes() const { return modes_; }
    [[nodiscard]] FieldMeta& meta() { return meta_; }
    [[nodiscard]] const FieldMeta& meta() const { return meta_; }

    [[nodiscard]] double& at(int j, int k, int i) { return values_[index(j, k, i)]; }
    [[nodiscard]] double at(int j, int k, int i) const { return values_[index(j, k, i)]; }
    // All modes at one node.
    [[nodiscard]] std::span<double> node(int j, int k) {
        return {values_.data() + index(j, k, 0), static_cast<std::size_t>(modes_)};
    }
    [[nodiscard]] std::span<const double> node(int j, int k) const {
        return {values_.data() + index(j, k, 0), static_cast<std::size_t>(modes_)};
    }
    // One time slice, n_x·p values.
    [[nodiscard]] std::span<double> slice(int j) {
        return {values_.data() + index(j, 0, 0), static_cast<std::size_t>(space_.n) * modes_};
    }
    [[nodiscard]] std::span<const double> slice(int j) const {
        return {values_.data() + index(j, 0, 0), static_cast<std::size_t>(space_.n) * modes_};
    }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::vector<double>& values() { return values_; }

    // Linear interpolation in x at slice j; flat beyond the ends.
    [[nodiscard]] double interpolate(int j, double x, int i) const;

private:
    [[nodiscard]] std::size_t index(int j, int k, int i) const {
        return (static_cast<std::size_t>(j) * space_.n + k) * modes_ + i;
    }

    TimeGrid time_;
    SpaceGrid space_;
    int modes_ = 0;
    std::vector<double> values_;
    FieldMeta meta_;
};

// Same time grid, same modes, each slice linearly interpolated onto `target`.
ValueField resample(const ValueField& field, const SpaceGrid& target);

struct ModeGap {
    double sup = 0.0;
    double mean_abs = 0.0;
};

// Per-mode gaps restricted to x-points with |x − center| ≤ half_width
// (all points when half_width is infinite). Throws GridMismatchError.
std::vector<ModeGap> compare_fields(const ValueField& a, const ValueField& b,
                                    double center = 0.0,
                                    double half_width = std::numeric_limits<double>::infinity());

// Largest sup gap across modes.
double sup_gap(const std::vector<ModeGap>& gaps);

// Worst violation of v^{i+1} − g̲ ≤ v^i ≤ v^{i+1} + ḡ over the field, with
// costs evaluated at each node. Returned as (lower violation, upper violation).
class SwitchingProblem;
struct BarrierViolation {
    double lower = 0.0;
    double upper = 0.0;
};
BarrierViolation barrier_violation(const SwitchingProblem& problem, const ValueField& field);

}  // namespace swgame
