#include "swgame/model/problem.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "swgame/errors.hpp"

namespace swgame {

namespace {

template <class Fn>
void require_all(const std::vector<Tagged<Fn>>& fns, int modes, const char* field) {
    if (static_cast<int>(fns.size()) != modes) {
        std::ostringstream os;
        os << field << ": expected " << modes << " functions, got " << fns.size();
        throw ConfigError(os.str());
    }
    for (std::size_t i = 0; i < fns.size(); ++i) {
        if (!fns[i].fn) {
            std::ostringstream os;
            os << field << "[" << i + 1 << "] is empty";
            throw ConfigError(os.str());
        }
    }
}

}  // namespace

SwitchingProblem::SwitchingProblem(ProblemSpec spec) : spec_(std::move(spec)) {
    if (spec_.modes < 2) throw ConfigError("a switching problem needs at least 2 modes");
    if (spec_.dim_x < 1 || spec_.dim_w < 1)
        throw ConfigError("state and Brownian dimensions must be positive");
    if (!(spec_.horizon > 0.0) || !std::isfinite(spec_.horizon))
        throw ConfigError("horizon must be a finite positive number");
    if (spec_.growth_exponent < 0) throw ConfigError("growth exponent must be non-negative");
    if (!spec_.drift.fn) throw ConfigError("drift is empty");
    if (!spec_.vol.fn) throw ConfigError("vol is empty");
    require_all(spec_.running_reward, spec_.modes, "running_reward");
    require_all(spec_.terminal, spec_.modes, "terminal");
    require_all(spec_.cost_down, spec_.modes, "cost_down");
    require_all(spec_.cost_up, spec_.modes, "cost_up");
}

double SwitchingProblem::drift1(double t, double x) const {
    if (spec_.dim_x != 1) throw ConfigError("drift1 requires dim_x == 1");
    double out = 0.0;
    spec_.drift.fn(t, std::span<const double>(&x, 1), std::span<double>(&out, 1));
    return out;
}

double SwitchingProblem::variance1(double t, double x) const {
    if (spec_.dim_x != 1) throw ConfigError("variance1 requires dim_x == 1");
    std::array<double, 8> small{};
    std::vector<double> large;
    std::span<double> out;
    if (spec_.dim_w <= static_cast<int>(small.size())) {
        out = std::span<double>(small.data(), spec_.dim_w);
    } else {
        large.assign(spec_.dim_w, 0.0);
        out = large;
    }
    spec_.vol.fn(t, std::span<const double>(&x, 1), out);
    double v = 0.0;
    for (double s : out) v += s * s;
    return v;
}

std::string SwitchingProblem::describe() const {
    std::ostringstream os;
    os << "p=" << spec_.modes << " dim_x=" << spec_.dim_x << " dim_w=" << spec_.dim_w
       << " T=" << spec_.horizon << " drift=" << spec_.drift.tag << " vol=" << spec_.vol.tag;
    return os.str();
}

}  // namespace swgame
