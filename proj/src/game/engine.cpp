#include "swgame/game/engine.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swgame/errors.hpp"
#include "swgame/parallel.hpp"

namespace swgame {

namespace {

long step_of(double t, const PathBundle& b) {
    if (!std::isfinite(t)) return std::numeric_limits<long>::max();
    const double pos = (t - b.t0) / b.dt;
    if (pos < -0.5) throw ConfigError("control time before the start of the grid");
    return std::lround(pos);
}

void check_grid(const HittingRule* rule, const PathBundle& b) {
    if (!rule) return;
    const ValueField& f = *rule->field;
    if (static_cast<std::size_t>(f.time().n_steps) != b.n_steps ||
        std::abs(f.time().t0 - b.t0) > 1e-12 ||
        std::abs(f.time().horizon - b.horizon()) > 1e-9) {
        std::ostringstream os;
        os << "grid mismatch: field time grid [" << f.time().t0 << ", " << f.time().horizon
           << "] with M=" << f.time().n_steps << ", path bundle [" << b.t0 << ", " << b.horizon()
           << "] with " << b.n_steps << " steps";
        throw GridMismatchError(os.str());
    }
}

}  // namespace

GameTranscript couple_controls(const SwitchingProblem& problem, const Control& u, const Control& v,
                               int start_mode, const PathBundle& bundle, std::size_t path,
                               CouplingOptions options) {
    if (u.owner() != Player::C1 || v.owner() != Player::C2)
        throw ConfigError("couple_controls: u must belong to C1 and v to C2");
    const int p = problem.modes();
    if (start_mode < 0 || start_mode >= p) throw ConfigError("couple_controls: bad start mode");
    if (path >= bundle.n_paths) throw ConfigError("couple_controls: path out of range");
    check_grid(u.hitting_rule(), bundle);
    check_grid(v.hitting_rule(), bundle);

    const long M = static_cast<long>(bundle.n_steps);
    const long budget = options.max_switches > 0 ? options.max_switches : 10L * p * M;
    std::vector<long> su, sv;
    for (double t : u.times()) su.push_back(step_of(t, bundle));
    for (double t : v.times()) sv.push_back(step_of(t, bundle));
    std::size_t r = 0;  // next unused entry of σ
    std::size_t s = 0;  // next unused entry of τ

    GameTranscript tr;
    tr.path = path;
    tr.start_mode = start_mode;
    int mode = start_mode;
    const std::vector<double> zeros(p, 0.0);

    for (long k = 0; k < M; ++k) {
        const double t = bundle.time(k);
        const auto x = bundle.state(path, k);
        while (true) {
            const bool due_u = r < su.size() && su[r] <= k;
            const bool due_v = s < sv.size() && sv[s] <= k;
            Player who;
            if (due_u || u.rule_fires(static_cast<int>(k), mode, x)) {
                who = Player::C1;
                if (due_u) ++r;
            } else if (due_v || v.rule_fires(static_cast<int>(k), mode, x)) {
                who = Player::C2;
                if (due_v) ++s;
            } else {
                break;
            }
            if (static_cast<long>(tr.events.size()) >= budget) {
                std::ostringstream os;
                os << "play on path " << path << " exceeded " << budget
                   << " switches at t=" << t << ", x=" << x[0]
                   << "; suspected zero-cost switching loop (check the non-free-loop property):";
                for (int i = 0; i < p; ++i)
                    os << " g̲" << i + 1 << "=" << problem.cost_down(i, t, x) << " ḡ" << i + 1
                       << "=" << problem.cost_up(i, t, x);
                throw NonAdmissibleError(os.str());
            }
            SwitchEvent ev;
            ev.step = static_cast<int>(k);
            ev.time = t;
            ev.from = mode;
            ev.to = problem.next(mode);
            ev.who = who;
            if (who == Player::C1) {
                ev.cost = problem.cost_down(mode, t, x);
                tr.cost_c1 += ev.cost;
            } else {
                ev.cost = problem.cost_up(mode, t, x);
                tr.cost_c2 += ev.cost;
            }
            ev.net_cost = tr.net_cost();
            tr.events.push_back(ev);
            mode = ev.to;
        }
        tr.reward_integral += problem.reward(mode, t, x, zeros) * bundle.dt;
    }
    tr.final_mode = mode;
    tr.terminal = problem.terminal(mode, bundle.state(path, bundle.n_steps));
    return tr;
}

std::vector<GameTranscript> play_game(const SwitchingProblem& problem, const Control& u,
                                      const Control& v, int start_mode, const PathBundle& bundle,
                                      CouplingOptions options) {
    std::vector<GameTranscript> out(bundle.n_paths);
    parallel_for(bundle.n_paths, options.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t a = b; a < e; ++a)
            out[a] = couple_controls(problem, u, v, start_mode, bundle, a, options);
    });
    return out;
}

PayoffEstimate payoff(const std::vector<GameTranscript>& ts) {
    PayoffEstimate est;
    est.n = ts.size();
    if (ts.empty()) return est;
    double sum = 0.0, events = 0.0, a2 = 0.0, b2 = 0.0;
    for (const auto& t : ts) {
        sum += t.payoff();
        events += static_cast<double>(t.events.size());
        a2 += t.cost_c1 * t.cost_c1;
        b2 += t.cost_c2 * t.cost_c2;
    }
    const double n = static_cast<double>(ts.size());
    est.mean = sum / n;
    est.mean_events = events / n;
    est.a_second_moment = a2 / n;
    est.b_second_moment = b2 / n;
    if (ts.size() > 1) {
        double ss = 0.0;
        for (const auto& t : ts) ss += (t.payoff() - est.mean) * (t.payoff() - est.mean);
        est.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return est;
}

void write_transcripts(const std::filesystem::path& path,
                       const std::vector<GameTranscript>& ts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (const auto& t : ts) {
        nlohmann::ordered_json events = nlohmann::ordered_json::array();
        for (const auto& e : t.events)
            events.push_back({{"step", e.step},
                              {"time", e.time},
                              {"from", e.from + 1},
                              {"to", e.to + 1},
                              {"who", to_string(e.who)},
                              {"cost", e.cost},
                              {"net_cost", e.net_cost}});
        nlohmann::ordered_json rec = {{"path", t.path},
                                      {"start_mode", t.start_mode + 1},
                                      {"final_mode", t.final_mode + 1},
                                      {"events", events},
                                      {"reward_integral", t.reward_integral},
                                      {"terminal", t.terminal},
                                      {"cost_c1", t.cost_c1},
                                      {"cost_c2", t.cost_c2},
                                      {"net_cost", t.net_cost()},
                                      {"payoff", t.payoff()}};
        out << rec.dump() << '\n';
    }
}

}  // namespace swgame
