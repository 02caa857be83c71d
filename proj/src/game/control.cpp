#include "swgame/game/control.hpp"

#include <cmath>

#include "swgame/errors.hpp"

namespace swgame {

const char* to_string(Player p) { return p == Player::C1 ? "C1" : "C2"; }

bool HittingRule::fires(Player owner, int step, int mode, double x) const {
    const ValueField& f = *field;
    const int k = f.space().nearest(x);
    const int next = problem->next(mode);
    const double xn = f.space().x(k);
    const double t = f.time().time(step);
    const double v = f.at(step, k, mode);
    const double w = f.at(step, k, next);
    if (owner == Player::C1) return v <= w - problem->cost_down1(mode, t, xn) + eps;
    return v >= w + problem->cost_up1(mode, t, xn) - eps;
}

Control Control::at_times(Player owner, std::vector<double> times) {
    for (std::size_t a = 0; a < times.size(); ++a) {
        if (std::isnan(times[a])) throw ConfigError("control times must not be NaN");
        if (a > 0 && times[a] < times[a - 1])
            throw ConfigError("control times must be non-decreasing");
    }
    Control c(owner);
    c.times_ = std::move(times);
    return c;
}

Control Control::hitting(Player owner, HittingRule rule) {
    if (!rule.field || !rule.problem) throw ConfigError("hitting rule needs a field and a problem");
    if (rule.field->modes() != rule.problem->modes())
        throw ConfigError("hitting rule: field and problem mode counts differ");
    Control c(owner);
    c.hit_ = std::make_shared<const HittingRule>(std::move(rule));
    return c;
}

Control Control::scripted(Player owner, ScriptFn fn) {
    Control c(owner);
    c.script_ = std::move(fn);
    return c;
}

Control Control::with_times(std::vector<double> times) const {
    Control c = at_times(owner_, std::move(times));
    c.hit_ = hit_;
    c.script_ = script_;
    return c;
}

bool Control::rule_fires(int step, int mode, std::span<const double> x) const {
    if (hit_ && hit_->fires(owner_, step, mode, x[0])) return true;
    return script_ && script_(step, mode, x);
}

}  // namespace swgame
