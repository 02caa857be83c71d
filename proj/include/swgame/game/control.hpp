#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "swgame/model/problem.hpp"
#include "swgame/value_field.hpp"

namespace swgame {

// C1 maximizes and pays g̲; C2 minimizes and pays ḡ.
enum class Player { C1, C2 };

const char* to_string(Player p);

inline constexpr double kNever = std::numeric_limits<double>::infinity();

// Switch in mode j at a node when the owner's obstacle is touched:
//   C1: v^j ≤ v^{j+1} − g̲_{j,j+1} + eps
//   C2: v^j ≥ v^{j+1} + ḡ_{j,j+1} − eps
// The field is read at the current time index and the node nearest to x.
struct HittingRule {
    std::shared_ptr<const ValueField> field;
    std::shared_ptr<const SwitchingProblem> problem;
    double eps = 1e-9;

    [[nodiscard]] bool fires(Player owner, int step, int mode, double x) const;
};

using ScriptFn = std::function<bool(int step, int mode, std::span<const double> x)>;

// A player's switching rule. Any combination of an explicit time list, a
// hitting rule and a script; the player wants to switch when any part does.
// A switch consumes the next explicit time if one is due.
class Control {
public:
    explicit Control(Player owner) : owner_(owner) {}

    static Control none(Player owner) { return Control(owner); }
    // Non-decreasing times; kNever entries are allowed and never fire.
    static Control at_times(Player owner, std::vector<double> times);
    static Control hitting(Player owner, HittingRule rule);
    static Control scripted(Player owner, ScriptFn fn);

    // Copy with the explicit times replaced by `times`.
    [[nodiscard]] Control with_times(std::vector<double> times) const;

    [[nodiscard]] Player owner() const { return owner_; }
    [[nodiscard]] const std::vector<double>& times() const { return times_; }
    [[nodiscard]] const HittingRule* hitting_rule() const { return hit_ ? &*hit_ : nullptr; }
    [[nodiscard]] bool has_script() const { return static_cast<bool>(script_); }
    [[nodiscard]] bool empty() const { return times_.empty() && !hit_ && !script_; }

    // Rule parts other than the explicit cursor.
    [[nodiscard]] bool rule_fires(int step, int mode, std::span<const double> x) const;

private:
    Player owner_;
    std::vector<double> times_;
    std::shared_ptr<const HittingRule> hit_;
    ScriptFn script_;
};

}  // namespace swgame
