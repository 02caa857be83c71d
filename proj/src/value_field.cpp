#include "swgame/value_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swgame/errors.hpp"
#include "swgame/model/problem.hpp"

namespace swgame {

std::vector<double> SpaceGrid::points() const {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = x(k);
    return out;
}

int SpaceGrid::nearest(double xv) const {
    if (n == 1) return 0;
    const double pos = (xv - x_min) / dx();
    if (!(pos > 0.0)) return 0;
    const auto k = static_cast<long>(std::floor(pos + 0.5));
    return static_cast<int>(std::min<long>(k, n - 1));
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::DirectMinmax: return "direct-minmax";
        case Provenance::DirectMaxmin: return "direct-maxmin";
        case Provenance::Penalized: return "penalized";
        case Provenance::LadderDecreasing: return "ladder-limit-decreasing";
        case Provenance::LadderIncreasing: return "ladder-limit-increasing";
        case Provenance::Lattice: return "lattice";
        case Provenance::Bsde: return "bsde";
    }
    return "?";
}

Provenance provenance_from_string(const std::string& s) {
    for (auto p : {Provenance::DirectMinmax, Provenance::DirectMaxmin, Provenance::Penalized,
                   Provenance::LadderDecreasing, Provenance::LadderIncreasing, Provenance::Lattice,
                   Provenance::Bsde})
        if (s == to_string(p)) return p;
    throw ConfigError("unknown provenance '" + s + "'");
}

ValueField::ValueField(TimeGrid time, SpaceGrid space, int modes, FieldMeta meta)
    : time_(time), space_(space), modes_(modes), meta_(meta) {
    if (time.n_steps < 1 || !(time.horizon > time.t0))
        throw ConfigError("ValueField: time grid needs n_steps >= 1 and t0 < horizon");
    const bool ok = space.n == 1 ? space.x_min == space.x_max
                                 : space.n > 1 && space.x_max > space.x_min;
    if (!ok) throw ConfigError("ValueField: space grid needs x_min < x_max with n >= 2, or n = 1");
    if (modes < 1) throw ConfigError("ValueField: modes must be positive");
    values_.assign(static_cast<std::size_t>(time.n_steps + 1) * space.n * modes, 0.0);
}

double ValueField::interpolate(int j, double xv, int i) const {
    if (space_.n == 1) return at(j, 0, i);
    const double pos = (xv - space_.x_min) / space_.dx();
    if (!(pos > 0.0)) return at(j, 0, i);
    if (pos >= space_.n - 1) return at(j, space_.n - 1, i);
    const int k = static_cast<int>(pos);
    const double w = pos - k;
    return (1.0 - w) * at(j, k, i) + w * at(j, k + 1, i);
}

ValueField resample(const ValueField& field, const SpaceGrid& target) {
    ValueField out(field.time(), target, field.modes(), field.meta());
    for (int j = 0; j <= field.time().n_steps; ++j)
        for (int k = 0; k < target.n; ++k)
            for (int i = 0; i < field.modes(); ++i)
                out.at(j, k, i) = field.interpolate(j, target.x(k), i);
    return out;
}

namespace {

std::string grid_str(const ValueField& f) {
    std::ostringstream os;
    os << "t∈[" << f.time().t0 << ", " << f.time().horizon << "] M=" << f.time().n_steps
       << ", x∈[" << f.space().x_min << ", " << f.space().x_max << "] n_x=" << f.space().n
       << ", p=" << f.modes();
    return os.str();
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }

}  // namespace

std::vector<ModeGap> compare_fields(const ValueField& a, const ValueField& b, double center,
                                    double half_width) {
    const bool same = a.modes() == b.modes() && a.time().n_steps == b.time().n_steps &&
                      a.space().n == b.space().n && close(a.time().t0, b.time().t0) &&
                      close(a.time().horizon, b.time().horizon) &&
                      close(a.space().x_min, b.space().x_min) &&
                      close(a.space().x_max, b.space().x_max);
    if (!same)
        throw GridMismatchError("grid mismatch: {" + grid_str(a) + "} vs {" + grid_str(b) + "}");
    std::vector<ModeGap> gaps(a.modes());
    std::vector<std::size_t> counts(a.modes(), 0);
    for (int j = 0; j <= a.time().n_steps; ++j) {
        for (int k = 0; k < a.space().n; ++k) {
            if (std::abs(a.space().x(k) - center) > half_width) continue;
            for (int i = 0; i < a.modes(); ++i) {
                const double d = std::abs(a.at(j, k, i) - b.at(j, k, i));
                gaps[i].sup = std::max(gaps[i].sup, d);
                gaps[i].mean_abs += d;
                ++counts[i];
            }
        }
    }
    for (int i = 0; i < a.modes(); ++i)
        if (counts[i] > 0) gaps[i].mean_abs /= static_cast<double>(counts[i]);
    return gaps;
}

double sup_gap(const std::vector<ModeGap>& gaps) {
    double s = 0.0;
    for (const auto& g : gaps) s = std::max(s, g.sup);
    return s;
}

BarrierViolation barrier_violation(const SwitchingProblem& problem, const ValueField& field) {
    BarrierViolation out;
    const int p = field.modes();
    for (int j = 0; j < field.time().n_steps; ++j) {
        const double t = field.time().time(j);
        for (int k = 0; k < field.space().n; ++k) {
            const double x = field.space().x(k);
            for (int i = 0; i < p; ++i) {
                const double v = field.at(j, k, i);
                const double w = field.at(j, k, problem.next(i));
                out.lower = std::max(out.lower, (w - problem.cost_down1(i, t, x)) - v);
                out.upper = std::max(out.upper, v - (w + problem.cost_up1(i, t, x)));
            }
        }
    }
    return out;
}

}  // namespace swgame
