#include "swgame/model/driver.hpp"

#include <sstream>

#include "swgame/errors.hpp"

namespace swgame {

double eval_penalized_driver(const SwitchingProblem& problem, int mode, double m, double n,
                             double t, std::span<const double> x, std::span<const double> y) {
    if (mode < 0 || mode >= problem.modes()) {
        std::ostringstream os;
        os << "mode " << mode << " outside [0, " << problem.modes() << ")";
        throw ConfigError(os.str());
    }
    if (static_cast<int>(y.size()) != problem.modes())
        throw ConfigError("penalized driver needs one value per mode");
    const int next = problem.next(mode);
    return problem.reward(mode, t, x, y) +
           penalty_term(y[mode], y[next], problem.cost_down(mode, t, x),
                        problem.cost_up(mode, t, x), m, n);
}

}  // namespace swgame
