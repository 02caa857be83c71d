#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "support.hpp"
#include "swgame/cli/config.hpp"
#include "swgame/errors.hpp"
#include "swgame/game/engine.hpp"
#include "swgame/game/saddle.hpp"
#include "swgame/lattice/lattice.hpp"
#include "swgame/model/fixtures.hpp"
#include "swgame/pde/solver.hpp"

using namespace swgame;
using swgame::testing::make_spec;
using swgame::testing::Spec1d;

namespace {

PathBundle bundle(const SwitchingProblem& prob, std::size_t n_steps, std::size_t n_paths,
                  std::uint64_t seed = 4, double x0 = 0.0) {
    const double x[1] = {x0};
    return simulate_paths(prob, 0.0, x, n_steps, n_paths, seed);
}

Control none1() { return Control::none(Player::C1); }
Control none2() { return Control::none(Player::C2); }

struct Deterministic {
    std::shared_ptr<const SwitchingProblem> prob;
    std::shared_ptr<const ValueField> field;
    PathBundle paths;
};

// σ ≡ 0, h = (0, 10): the value is (9, 10) on every node.
Deterministic deterministic(double cost_up = 1.0) {
    auto spec = fixtures::deterministic_spec();
    for (auto& g : spec.cost_up) g = families::constant_cost(cost_up);
    auto prob = std::make_shared<const SwitchingProblem>(spec);
    auto field = std::make_shared<const ValueField>(solve_minmax(*prob, default_grid(*prob, 0.0, 50, 5)));
    return {prob, field, bundle(*prob, 50, 3)};
}

}  // namespace

TEST(Coupling, EmptyControlsNeverSwitch) {
    SwitchingProblem prob(fixtures::game_spec());
    const auto B = bundle(prob, 100, 20);
    for (std::size_t a = 0; a < 20; ++a) {
        const auto tr = couple_controls(prob, none1(), none2(), 2, B, a);
        EXPECT_TRUE(tr.events.empty());
        EXPECT_EQ(tr.final_mode, 2);
        EXPECT_EQ(tr.net_cost(), 0.0);
    }
}

TEST(Coupling, MinimizerMovesFirstThenMaximizer) {
    SwitchingProblem prob(fixtures::game_spec());
    const auto B = bundle(prob, 100, 1);
    const auto tr = couple_controls(prob, Control::at_times(Player::C1, {0.5}),
                                    Control::at_times(Player::C2, {0.3}), 0, B, 0);
    ASSERT_EQ(tr.events.size(), 2u);
    EXPECT_EQ(tr.events[0].who, Player::C2);
    EXPECT_DOUBLE_EQ(tr.events[0].time, 0.3);
    EXPECT_EQ(tr.events[0].from, 0);
    EXPECT_EQ(tr.events[0].to, 1);
    EXPECT_EQ(tr.events[1].who, Player::C1);
    EXPECT_DOUBLE_EQ(tr.events[1].time, 0.5);
    EXPECT_EQ(tr.events[1].from, 1);
    EXPECT_EQ(tr.events[1].to, 2);
    EXPECT_EQ(tr.final_mode, 2);
}

TEST(Coupling, SimultaneousRequestsGoToMaximizerFirst) {
    SwitchingProblem prob(fixtures::game_spec());
    const auto B = bundle(prob, 100, 1);
    const auto tr = couple_controls(prob, Control::at_times(Player::C1, {0.4}),
                                    Control::at_times(Player::C2, {0.4}), 0, B, 0);
    ASSERT_EQ(tr.events.size(), 2u);
    EXPECT_EQ(tr.events[0].who, Player::C1);
    EXPECT_EQ(tr.events[1].who, Player::C2);
    EXPECT_EQ(tr.events[0].step, 40);
    EXPECT_EQ(tr.events[1].step, 40);
    EXPECT_EQ(tr.final_mode, 2);
}

TEST(Coupling, ForcedMinimizerSwitchPaysUpperCost) {
    SwitchingProblem prob(fixtures::deterministic_spec());
    const auto B = bundle(prob, 100, 1);
    const auto tr = couple_controls(prob, none1(), Control::at_times(Player::C2, {0.3}), 0, B, 0);
    EXPECT_DOUBLE_EQ(tr.payoff(), 11.0);  // h² = 10 plus C2's fee
    EXPECT_DOUBLE_EQ(tr.cost_c2, 1.0);
}

TEST(Coupling, CostAttributionAndCyclicLaw) {
    SwitchingProblem prob(fixtures::game_spec());
    const auto B = bundle(prob, 200, 50);
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> s(1 + gen() % 5), t(1 + gen() % 5);
        for (auto& x : s) x = u(gen);
        for (auto& x : t) x = u(gen);
        std::sort(s.begin(), s.end());
        std::sort(t.begin(), t.end());
        const int start = static_cast<int>(gen() % 3);
        const auto tr = couple_controls(prob, Control::at_times(Player::C1, s),
                                        Control::at_times(Player::C2, t), start, B, trial);
        double a = 0.0, b = 0.0;
        int mode = start, last_step = 0;
        for (const auto& e : tr.events) {
            ASSERT_EQ(e.from, mode);
            ASSERT_EQ(e.to, (mode + 1) % 3);
            ASSERT_GE(e.step, last_step);
            const auto x = B.state(trial, e.step);
            if (e.who == Player::C1) {
                ASSERT_EQ(e.cost, prob.cost_down(mode, e.time, x));
                a += e.cost;
            } else {
                ASSERT_EQ(e.cost, prob.cost_up(mode, e.time, x));
                b += e.cost;
            }
            ASSERT_DOUBLE_EQ(e.net_cost, a - b);
            mode = e.to;
            last_step = e.step;
        }
        EXPECT_EQ(tr.final_mode, mode);
        EXPECT_DOUBLE_EQ(tr.cost_c1, a);
        EXPECT_DOUBLE_EQ(tr.cost_c2, b);
        EXPECT_LE(tr.events.size(), s.size() + t.size());
    }
}

TEST(Coupling, FreeLoopIsNotAdmissible) {
    SwitchingProblem prob(make_spec(Spec1d{.p = 3, .gd = {0, 0, 0}, .gu = {0, 0, 0}}));
    const auto B = bundle(prob, 10, 1);
    const auto always = Control::scripted(Player::C1, [](int, int, std::span<const double>) { return true; });
    try {
        (void)couple_controls(prob, always, none2(), 0, B, 0);
        FAIL();
    } catch (const NonAdmissibleError& e) {
        EXPECT_NE(std::string(e.what()).find("300 switches"), std::string::npos) << e.what();
    }
    EXPECT_THROW(couple_controls(prob, always, none2(), 0, B, 0, {.max_switches = 7}),
                 NonAdmissibleError);
}

TEST(Coupling, BadArgumentsAreConfigErrors) {
    SwitchingProblem prob(fixtures::game_spec());
    const auto B = bundle(prob, 10, 1);
    EXPECT_THROW(couple_controls(prob, none2(), none2(), 0, B, 0), ConfigError);
    EXPECT_THROW(couple_controls(prob, none1(), none2(), 3, B, 0), ConfigError);
    EXPECT_THROW(Control::at_times(Player::C1, {0.5, 0.2}), ConfigError);
}

TEST(Payoff, EmptyControlsMatchDirectMonteCarlo) {
    SwitchingProblem prob(fixtures::game_spec());
    const auto B = bundle(prob, 100, 2000);
    const auto est = payoff(play_game(prob, none1(), none2(), 1, B));
    const std::vector<double> zeros(3, 0.0);
    double sum = 0.0;
    for (std::size_t a = 0; a < B.n_paths; ++a) {
        double r = 0.0;
        for (std::size_t k = 0; k < B.n_steps; ++k)
            r += prob.reward(1, B.time(k), B.state(a, k), zeros) * B.dt;
        sum += r + prob.terminal(1, B.state(a, B.n_steps));
    }
    EXPECT_NEAR(est.mean, sum / 2000.0, 1e-12);
    EXPECT_EQ(est.n, 2000u);
    EXPECT_GT(est.se, 0.0);
    EXPECT_EQ(est.mean_events, 0.0);
}

TEST(Payoff, UnitRewardAddsHorizon) {
    SwitchingProblem prob(make_spec(Spec1d{.T = 0.75, .sigma = 0.3, .f = {1, 1}, .h = {2, 2}}));
    const auto B = bundle(prob, 60, 10);
    for (const auto& tr : play_game(prob, none1(), none2(), 0, B))
        EXPECT_NEAR(tr.payoff(), 2.75, 1e-12);
}

TEST(Payoff, ThreadAndReplayInvariant) {
    SwitchingProblem prob(fixtures::game_spec());
    const auto B = bundle(prob, 100, 500);
    const auto u = Control::at_times(Player::C1, {0.2, 0.7});
    const auto v = Control::at_times(Player::C2, {0.45});
    const auto a = play_game(prob, u, v, 0, B, {.threads = 1});
    const auto b = play_game(prob, u, v, 0, B, {.threads = 4});
    const auto c = play_game(prob, u, v, 0, B, {.threads = 1});
    for (std::size_t q = 0; q < a.size(); ++q) {
        EXPECT_EQ(a[q].payoff(), b[q].payoff());
        EXPECT_EQ(a[q].payoff(), c[q].payoff());
        EXPECT_EQ(a[q].events.size(), b[q].events.size());
    }
}

TEST(Payoff, TranscriptsAreJsonLines) {
    SwitchingProblem prob(fixtures::game_spec());
    const auto B = bundle(prob, 20, 3);
    const auto ts = play_game(prob, Control::at_times(Player::C1, {0.5}), none2(), 0, B);
    const auto path = std::filesystem::temp_directory_path() / "swgame_transcripts.jsonl";
    write_transcripts(path, ts);
    std::ifstream in(path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(line.front(), '{');
        EXPECT_NE(line.find("\"who\":\"C1\""), std::string::npos);
        ++n;
    }
    EXPECT_EQ(n, 3);
}

TEST(Saddle, HugeCostsNeverFire) {
    auto prob = std::make_shared<const SwitchingProblem>(
        fixtures::with_constant_costs(fixtures::game_spec(), 1e6));
    const auto lat = build_lattice(*prob, 0.0, 0.0, 50, 41);
    auto field = std::make_shared<const ValueField>(backward_induct(*prob, lat).field);
    const auto pair = synthesize_saddle(prob, field, 0);
    const auto B = bundle(*prob, 50, 200);
    for (const auto& tr : play_game(*prob, pair.u, pair.v, 0, B)) EXPECT_TRUE(tr.events.empty());
}

TEST(Saddle, MaximizerHalfRealizesNine) {
    const auto d = deterministic();
    EXPECT_DOUBLE_EQ(d.field->at(0, 2, 0), 9.0);
    EXPECT_DOUBLE_EQ(d.field->at(0, 2, 1), 10.0);
    const auto pair = synthesize_saddle(d.prob, d.field, 0);
    const auto tr = couple_controls(*d.prob, pair.u, none2(), 0, d.paths, 0);
    ASSERT_EQ(tr.events.size(), 1u);
    EXPECT_EQ(tr.events[0].step, 0);
    EXPECT_DOUBLE_EQ(tr.payoff(), 9.0);
}

TEST(Saddle, EqualCostsOnBothContactsLoop) {
    // v¹ = v² − g̲₁ and v² = v¹ + ḡ₂ with −g̲₁ + ḡ₂ = 0, so both players keep switching.
    const auto d = deterministic();
    const auto pair = synthesize_saddle(d.prob, d.field, 0);
    EXPECT_THROW(couple_controls(*d.prob, pair.u, pair.v, 0, d.paths, 0), NonAdmissibleError);
}

TEST(Saddle, ScriptedMinimizerCannotPushBelowValue) {
    const auto d = deterministic();
    const auto u = best_response(d.prob, d.field, none2(), Player::C1, 0);
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> ts(1 + gen() % 3);
        for (auto& x : ts) x = t(gen);
        std::sort(ts.begin(), ts.end());
        const auto tr = couple_controls(*d.prob, u, Control::at_times(Player::C2, ts), 0, d.paths, 0);
        EXPECT_GE(tr.payoff(), 9.0 - 1e-12) << trial;
    }
    const auto once = Control::scripted(Player::C2, [fired = std::make_shared<bool>(false)](
                                                         int, int mode, std::span<const double>) {
        if (mode != 1 || *fired) return false;
        return *fired = true;
    });
    EXPECT_DOUBLE_EQ(couple_controls(*d.prob, u, once, 0, d.paths, 0).payoff(), 9.0);
}

TEST(Saddle, ContactToleranceAboveGapIsRejected) {
    const auto d = deterministic();
    EXPECT_THROW(synthesize_saddle(d.prob, d.field, 0, 2.5), ConfigError);
    EXPECT_NO_THROW(synthesize_saddle(d.prob, d.field, 0, 0.5));
}

TEST(Saddle, PenalizedFieldIsRejected) {
    auto prob = std::make_shared<const SwitchingProblem>(fixtures::game_spec());
    auto field = std::make_shared<const ValueField>(
        solve_penalized(*prob, default_grid(*prob, 0.0, 50, 31), 1.0, 1.0));
    EXPECT_THROW(synthesize_saddle(prob, field, 0), ConfigError);
}

TEST(Saddle, ZeroToleranceReproducesLatticeTags) {
    auto prob = std::make_shared<const SwitchingProblem>(fixtures::game_spec());
    const auto lat = build_lattice(*prob, 0.0, 0.0, 40, 31);
    const auto vals = backward_induct(*prob, lat);
    HittingRule rule{std::make_shared<const ValueField>(vals.field), prob, 0.0};
    int contacts = 0;
    for (int j = 0; j < 40; ++j)
        for (int k = 0; k < 31; ++k)
            for (int i = 0; i < 3; ++i) {
                const double x = vals.field.space().x(k);
                const Regime r = vals.tag(j, k, i);
                ASSERT_EQ(rule.fires(Player::C1, j, i, x), r == Regime::LowerContact);
                ASSERT_EQ(rule.fires(Player::C2, j, i, x), r == Regime::UpperContact);
                contacts += r != Regime::Interior;
            }
    EXPECT_GT(contacts, 0);
}

TEST(Saddle, BestResponseRejectsSameSide) {
    const auto d = deterministic();
    EXPECT_THROW(best_response(d.prob, d.field, none1(), Player::C1, 0), ConfigError);
}

TEST(SaddleAudit, DeterministicGameIsExact) {
    const auto d = deterministic(2.0);
    const auto rep = saddle_audit(d.prob, d.field, d.paths, 0, 10, 1);
    EXPECT_DOUBLE_EQ(rep.field_value, 9.0);
    EXPECT_DOUBLE_EQ(rep.saddle.mean, 9.0);
    EXPECT_EQ(rep.saddle.se, 0.0);
    EXPECT_TRUE(rep.value_ok);
    EXPECT_EQ(rep.violations(), 0) << rep.to_text();
    EXPECT_EQ(rep.perturbations.size(), 20u);
    EXPECT_GT(rep.strictly_worse(), 0);
    EXPECT_TRUE(rep.passed());
}

TEST(SaddleAudit, HugeCostDeviationsOnlyHurtTheDeviator) {
    auto prob = std::make_shared<const SwitchingProblem>(
        fixtures::with_constant_costs(fixtures::game_spec(), 1e6));
    const auto lat = build_lattice(*prob, 0.0, 0.0, 50, 41);
    auto field = std::make_shared<const ValueField>(backward_induct(*prob, lat).field);
    const auto B = bundle(*prob, 50, 500);
    const auto rep = saddle_audit(prob, field, B, 0, 6, 3);
    EXPECT_EQ(rep.violations(), 0) << rep.to_text();
    EXPECT_EQ(rep.strictly_worse(), 12) << rep.to_text();
    EXPECT_EQ(rep.saddle.mean_events, 0.0);
}

TEST(SaddleAudit, GameFixtureOnSmallGrid) {
    const auto cfg = load_config(swgame::testing::fixture("small_game.json"));
    auto prob = std::make_shared<const SwitchingProblem>(cfg.problem);
    auto field = std::make_shared<const ValueField>(solve_minmax(*prob, grid_spec(cfg, *prob)));
    const auto B = bundle(*prob, static_cast<std::size_t>(field->time().n_steps), 4000, 9, cfg.x0);
    const auto rep = saddle_audit(prob, field, B, 0, 4, 2);
    EXPECT_TRUE(rep.passed()) << rep.to_text();
}

TEST(SaddleAudit, CsvHasOneRowPerPlay) {
    const auto d = deterministic(2.0);
    const auto rep = saddle_audit(d.prob, d.field, d.paths, 0, 3, 1);
    const auto path = std::filesystem::temp_directory_path() / "swgame_saddle.csv";
    rep.write_csv(path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 1 + 1 + 6);
}
