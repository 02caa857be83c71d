#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace swgame {

// Writes b(t,x) (length dim_x) or σ(t,x) (row-major dim_x × dim_w) into `out`.
using CoefficientFn =
    std::function<void(double t, std::span<const double> x, std::span<double> out)>;
// f^i(t, x, ȳ) with ȳ holding one value per mode.
using RewardFn =
    std::function<double(double t, std::span<const double> x, std::span<const double> y)>;
using TerminalFn = std::function<double(std::span<const double> x)>;
using CostFn = std::function<double(double t, std::span<const double> x)>;

// A callable plus a human-readable tag used only in reports.
template <class Fn>
struct Tagged {
    Fn fn;
    std::string tag;
};

struct ProblemSpec {
    int modes = 2;
    int dim_x = 1;
    int dim_w = 1;
    double horizon = 1.0;
    Tagged<CoefficientFn> drift;
    Tagged<CoefficientFn> vol;
    std::vector<Tagged<RewardFn>> running_reward;
    std::vector<Tagged<TerminalFn>> terminal;
    // cost_down[i] is g̲_{i,i+1} (paid by the maximizer C1),
    // cost_up[i] is ḡ_{i,i+1} (paid by the minimizer C2).
    std::vector<Tagged<CostFn>> cost_down;
    std::vector<Tagged<CostFn>> cost_up;
    int growth_exponent = 1;
    // False when every f^i ignores ȳ; the game payoff is only defined then.
    bool reward_uses_values = true;
};

// Immutable switching-game datum. Modes are zero-based in this API; the
// successor of mode i is (i + 1) mod p and cannot be changed.
class SwitchingProblem {
public:
    explicit SwitchingProblem(ProblemSpec spec);

    [[nodiscard]] int modes() const { return spec_.modes; }
    [[nodiscard]] int dim_x() const { return spec_.dim_x; }
    [[nodiscard]] int dim_w() const { return spec_.dim_w; }
    [[nodiscard]] double horizon() const { return spec_.horizon; }
    [[nodiscard]] int growth_exponent() const { return spec_.growth_exponent; }
    [[nodiscard]] bool reward_uses_values() const { return spec_.reward_uses_values; }
    [[nodiscard]] int next(int mode) const { return (mode + 1) % spec_.modes; }

    void drift(double t, std::span<const double> x, std::span<double> out) const {
        spec_.drift.fn(t, x, out);
    }
    void vol(double t, std::span<const double> x, std::span<double> out) const {
        spec_.vol.fn(t, x, out);
    }
    [[nodiscard]] double reward(int mode, double t, std::span<const double> x,
                                std::span<const double> y) const {
        return spec_.running_reward[mode].fn(t, x, y);
    }
    [[nodiscard]] double terminal(int mode, std::span<const double> x) const {
        return spec_.terminal[mode].fn(x);
    }
    [[nodiscard]] double cost_down(int mode, double t, std::span<const double> x) const {
        return spec_.cost_down[mode].fn(t, x);
    }
    [[nodiscard]] double cost_up(int mode, double t, std::span<const double> x) const {
        return spec_.cost_up[mode].fn(t, x);
    }

    // Scalar conveniences for dim_x == 1.
    [[nodiscard]] double drift1(double t, double x) const;
    // Σ_j σ_{0j}², the local variance rate of a one-dimensional state.
    [[nodiscard]] double variance1(double t, double x) const;
    [[nodiscard]] double reward1(int mode, double t, double x, std::span<const double> y) const {
        return reward(mode, t, std::span<const double>(&x, 1), y);
    }
    [[nodiscard]] double terminal1(int mode, double x) const {
        return terminal(mode, std::span<const double>(&x, 1));
    }
    [[nodiscard]] double cost_down1(int mode, double t, double x) const {
        return cost_down(mode, t, std::span<const double>(&x, 1));
    }
    [[nodiscard]] double cost_up1(int mode, double t, double x) const {
        return cost_up(mode, t, std::span<const double>(&x, 1));
    }

    [[nodiscard]] const ProblemSpec& spec() const { return spec_; }
    [[nodiscard]] std::string describe() const;

private:
    ProblemSpec spec_;
};

}  // namespace swgame
