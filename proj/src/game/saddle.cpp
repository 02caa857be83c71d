#include "swgame/game/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "swgame/errors.hpp"
#include "swgame/field_io.hpp"
#include "swgame/rng.hpp"

namespace swgame {

double default_contact_eps(const ValueField& field) {
    return std::max(1e-9, 2.0 * field.meta().clamp_residual);
}

namespace {

void check_field(const SwitchingProblem& problem, const ValueField& field, double eps) {
    switch (field.meta().provenance) {
        case Provenance::DirectMinmax:
        case Provenance::DirectMaxmin:
        case Provenance::Lattice:
            break;
        default:
            throw ConfigError(std::string("saddle synthesis needs a direct or lattice field, got ") +
                              to_string(field.meta().provenance));
    }
    if (field.modes() != problem.modes())
        throw ConfigError("saddle synthesis: field and problem mode counts differ");
    if (problem.dim_x() != 1) throw ConfigError("saddle synthesis requires dim_x = 1");
    for (int j = 0; j <= field.time().n_steps; ++j) {
        const double t = field.time().time(j);
        for (int k = 0; k < field.space().n; ++k) {
            const double x = field.space().x(k);
            for (int i = 0; i < field.modes(); ++i) {
                const double v = field.at(j, k, i);
                const double w = field.at(j, k, problem.next(i));
                const bool c1 = v <= w - problem.cost_down1(i, t, x) + eps;
                const bool c2 = v >= w + problem.cost_up1(i, t, x) - eps;
                if (c1 && c2) {
                    std::ostringstream os;
                    os << "contact tolerance " << eps << " makes both players' switch conditions "
                       << "hold at t=" << t << ", x=" << x << ", mode " << i + 1
                       << "; it must stay below the cost gap g̲ + ḡ";
                    throw ConfigError(os.str());
                }
            }
        }
    }
}

HittingRule make_rule(std::shared_ptr<const SwitchingProblem> problem,
                      std::shared_ptr<const ValueField> field, double eps) {
    HittingRule r;
    r.field = std::move(field);
    r.problem = std::move(problem);
    r.eps = eps;
    return r;
}

std::vector<double> random_times(const CounterRng& rng, std::uint64_t stream, int count,
                                 double t0, double T) {
    std::vector<double> ts;
    for (int c = 0; c < count; ++c) ts.push_back(t0 + (T - t0) * rng.uniform(stream, 1 + c));
    std::sort(ts.begin(), ts.end());
    return ts;
}

std::string times_str(const std::vector<double>& ts) {
    std::ostringstream os;
    os << "{";
    for (std::size_t a = 0; a < ts.size(); ++a) os << (a ? ", " : "") << ts[a];
    os << "}";
    return os.str();
}

}  // namespace

SaddlePair synthesize_saddle(std::shared_ptr<const SwitchingProblem> problem,
                             std::shared_ptr<const ValueField> field, int start_mode, double eps) {
    if (!problem || !field) throw ConfigError("synthesize_saddle: missing problem or field");
    if (start_mode < 0 || start_mode >= problem->modes())
        throw ConfigError("synthesize_saddle: bad start mode");
    if (eps < 0.0) eps = default_contact_eps(*field);
    check_field(*problem, *field, eps);
    return {Control::hitting(Player::C1, make_rule(problem, field, eps)),
            Control::hitting(Player::C2, make_rule(problem, field, eps)), eps};
}

Control best_response(std::shared_ptr<const SwitchingProblem> problem,
                      std::shared_ptr<const ValueField> field, const Control& opponent,
                      Player responder, int start_mode, double eps) {
    if (opponent.owner() == responder)
        throw ConfigError("best_response: opponent and responder are the same player");
    const SaddlePair pair = synthesize_saddle(std::move(problem), std::move(field), start_mode, eps);
    return responder == Player::C1 ? pair.u : pair.v;
}

int SaddleReport::violations() const {
    return static_cast<int>(std::count_if(perturbations.begin(), perturbations.end(),
                                          [](const auto& r) { return r.violates; }));
}

int SaddleReport::strictly_worse() const {
    return static_cast<int>(std::count_if(perturbations.begin(), perturbations.end(),
                                          [](const auto& r) { return r.strictly_worse; }));
}

std::string SaddleReport::to_text() const {
    std::ostringstream os;
    os << "start mode " << start_mode + 1 << ", x0=" << x0 << "\n";
    os << "J(u*,v*) = " << saddle.mean << " ± " << saddle.se << " (n=" << saddle.n
       << ", mean switches " << saddle.mean_events << ")\n";
    os << "v(t0,x0) = " << field_value << " -> " << (value_ok ? "consistent" : "INCONSISTENT")
       << "\n";
    for (const auto& r : perturbations) {
        os << "  " << to_string(r.deviator) << " deviates [" << r.description << "]: J = "
           << r.estimate.mean << ", excess " << r.excess << " (SE " << r.se << ")"
           << (r.violates ? " VIOLATION" : "") << (r.strictly_worse ? " strictly-worse" : "")
           << "\n";
    }
    os << "violations: " << violations() << ", strictly worse: " << strictly_worse() << "\n";
    os << "saddle audit: " << (passed() ? "pass" : "fail") << "\n";
    return os.str();
}

void SaddleReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "kind,deviator,description,J,se,excess,violates,strictly_worse\n";
    out << "saddle,,," << format_double(saddle.mean) << ',' << format_double(saddle.se) << ','
        << format_double(saddle.mean - field_value) << ',' << (value_ok ? 0 : 1) << ",0\n";
    for (const auto& r : perturbations)
        out << "perturbation," << to_string(r.deviator) << ",\"" << r.description << "\","
            << format_double(r.estimate.mean) << ',' << format_double(r.se) << ','
            << format_double(r.excess) << ',' << (r.violates ? 1 : 0) << ','
            << (r.strictly_worse ? 1 : 0) << '\n';
}

SaddleReport saddle_audit(std::shared_ptr<const SwitchingProblem> problem,
                          std::shared_ptr<const ValueField> field, const PathBundle& bundle,
                          int start_mode, int n_perturbations, std::uint64_t seed,
                          SaddleOptions opt) {
    if (n_perturbations < 0) throw ConfigError("saddle_audit: negative perturbation count");
    const SaddlePair star = synthesize_saddle(problem, field, start_mode, opt.eps);
    SaddleReport rep;
    rep.start_mode = start_mode;
    rep.x0 = bundle.x0.at(0);
    rep.field_value = field->interpolate(0, rep.x0, start_mode);
    rep.saddle = payoff(play_game(*problem, star.u, star.v, start_mode, bundle, opt.coupling));
    rep.value_ok = std::abs(rep.saddle.mean - rep.field_value) <=
                   opt.se_multiplier * rep.saddle.se + opt.scheme_tolerance;

    const CounterRng rng(seed, 0x5add1e);
    const double t0 = bundle.t0;
    const double T = bundle.horizon();
    for (int side = 0; side < 2; ++side) {
        const Player dev = side == 0 ? Player::C1 : Player::C2;
        const Control& base = side == 0 ? star.u : star.v;
        for (int q = 0; q < n_perturbations; ++q) {
            const std::uint64_t stream = static_cast<std::uint64_t>(side) * 100000 + q;
            Control c(dev);
            std::string desc;
            if (q % 2 == 0) {
                const int count = 1 + static_cast<int>(3.0 * rng.uniform(stream, 0));
                const auto ts = random_times(rng, stream, std::min(count, 3), t0, T);
                c = Control::at_times(dev, ts);
                desc = "times " + times_str(ts);
            } else {
                const int count = 1 + static_cast<int>(2.0 * rng.uniform(stream, 0));
                const auto ts = random_times(rng, stream, std::min(count, 2), t0, T);
                c = base.with_times(ts);
                desc = "saddle rule + times " + times_str(ts);
            }
            PerturbationResult r;
            r.deviator = dev;
            r.description = desc;
            r.estimate = side == 0
                             ? payoff(play_game(*problem, c, star.v, start_mode, bundle, opt.coupling))
                             : payoff(play_game(*problem, star.u, c, start_mode, bundle, opt.coupling));
            r.se = std::sqrt(r.estimate.se * r.estimate.se + rep.saddle.se * rep.saddle.se);
            r.excess = side == 0 ? r.estimate.mean - rep.saddle.mean
                                 : rep.saddle.mean - r.estimate.mean;
            // Round-off floor so deterministic plays (SE = 0) compare exactly.
            const double floor = 1e-12 * (1.0 + std::abs(rep.saddle.mean));
            r.violates = r.excess > opt.se_multiplier * r.se + floor;
            r.strictly_worse = r.excess < -opt.se_multiplier * r.se - floor;
            rep.perturbations.push_back(std::move(r));
        }
    }
    return rep;
}

}  // namespace swgame
