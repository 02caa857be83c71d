#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "swgame/cli/config.hpp"
#include "swgame/errors.hpp"
#include "swgame/model/audit.hpp"
#include "swgame/model/fixtures.hpp"

using namespace swgame;
using swgame::testing::make_spec;
using swgame::testing::Spec1d;

namespace {

const AuditCheck& find(const AuditReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    throw std::runtime_error("missing check " + name);
}

std::vector<TxPoint> one_point(double t = 0.0, double x = 0.0) { return {TxPoint{t, {x}}}; }

// All exact and sampled audits, as cmd_audit runs them.
AuditReport full_audit(const SwitchingProblem& prob) {
    std::vector<double> xs;
    for (int k = 0; k <= 24; ++k) xs.push_back(-3.0 + 0.25 * k);
    AuditReport r = validate_consistency(prob, xs);
    r.append(check_nonfree_loop(prob, tx_grid_1d(0.0, prob.horizon(), 11, xs)));
    r.append(audit_regularity(prob, 7, 200));
    return r;
}

}  // namespace

TEST(Consistency, EqualTerminalsPass) {
    SwitchingProblem prob(make_spec(Spec1d{}));
    std::vector<double> xs{-2.0, 0.0, 3.0};
    const auto r = validate_consistency(prob, xs);
    EXPECT_TRUE(r.overall());
}

TEST(Consistency, TerminalAboveUpperBarrierFails) {
    Spec1d s;
    s.h = {5.0, 0.0};
    SwitchingProblem prob(make_spec(s));
    std::vector<double> xs{0.0};
    const auto r = validate_consistency(prob, xs);
    ASSERT_FALSE(r.overall());
    const auto& c = find(r, "H2-consistency");
    ASSERT_TRUE(c.witness.has_value());
    EXPECT_EQ(c.witness->mode, 0);
    EXPECT_DOUBLE_EQ(c.witness->x.at(0), 0.0);
    EXPECT_DOUBLE_EQ(c.measured, -4.0);  // 5 > 0 + 1 by 4
}

TEST(Consistency, LinearTerminalsWithinCostTwoPass) {
    ProblemSpec spec = make_spec(Spec1d{.p = 3, .gd = {2, 2, 2}, .gu = {2, 2, 2}});
    for (int i = 0; i < 3; ++i) spec.terminal[i] = families::polynomial_terminal({0.0, i + 1.0});
    SwitchingProblem prob(spec);
    std::vector<double> xs{1.0};
    EXPECT_TRUE(validate_consistency(prob, xs).overall());
}

TEST(Consistency, InvariantUnderCommonShift) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0), c(0.0, 1.5);
    std::vector<double> xs{-1.0, 0.0, 0.5, 2.0};
    for (int trial = 0; trial < 200; ++trial) {
        Spec1d s{.p = 3, .h = {u(gen), u(gen), u(gen)}, .gd = {c(gen), c(gen), c(gen)},
                 .gu = {c(gen), c(gen), c(gen)}};
        const bool base = validate_consistency(SwitchingProblem(make_spec(s)), xs).overall();
        const double shift = 10.0 * u(gen);
        for (auto& h : s.h) h += shift;
        EXPECT_EQ(validate_consistency(SwitchingProblem(make_spec(s)), xs).overall(), base);
    }
}

TEST(Consistency, NonFiniteTerminalIsEvaluationError) {
    auto spec = make_spec(Spec1d{});
    spec.terminal[1] = swgame::testing::terminal_fn([](std::span<const double>) { return NAN; });
    std::vector<double> xs{0.0};
    EXPECT_THROW(validate_consistency(SwitchingProblem(spec), xs), EvaluationError);
}

TEST(NonFreeLoop, OddCycleWithUnitCostsPasses) {
    SwitchingProblem prob(make_spec(Spec1d{.p = 3}));
    const auto r = check_nonfree_loop(prob, one_point());
    EXPECT_TRUE(r.overall());
    EXPECT_DOUBLE_EQ(find(r, "H3b-nonfree-loop").measured, 1.0);  // |sum| ∈ {1, 3}
}

TEST(NonFreeLoop, ZeroCostsFail) {
    SwitchingProblem prob(make_spec(Spec1d{.gd = {0, 0}, .gu = {0, 0}}));
    const auto r = check_nonfree_loop(prob, one_point());
    EXPECT_EQ(find(r, "H3b-nonfree-loop").verdict, Verdict::Fail);
    EXPECT_EQ(find(r, "H3a-positive-gap").verdict, Verdict::Fail);
    EXPECT_TRUE(find(r, "H3b-nonfree-loop").witness.has_value());
}

TEST(NonFreeLoop, CancellingAssignmentFound) {
    // (−g̲_{1,2}, +ḡ_{2,1}) = −1 + 1 = 0
    SwitchingProblem prob(make_spec(Spec1d{.gd = {1, 0}, .gu = {0, 1}}));
    const auto r = check_nonfree_loop(prob, one_point(0.25, 1.5));
    const auto& c = find(r, "H3b-nonfree-loop");
    ASSERT_EQ(c.verdict, Verdict::Fail);
    ASSERT_TRUE(c.witness.has_value());
    EXPECT_DOUBLE_EQ(c.witness->t, 0.25);
    EXPECT_DOUBLE_EQ(c.witness->x.at(0), 1.5);
    // Two assignments cancel here: (−g̲1, +ḡ2) = −1 + 1 and (+ḡ1, −g̲2) = 0 + 0.
    const auto& d = c.witness->detail;
    const bool first = d.find("-g̲1") != std::string::npos && d.find("+ḡ2") != std::string::npos;
    const bool second = d.find("+ḡ1") != std::string::npos && d.find("-g̲2") != std::string::npos;
    EXPECT_TRUE(first || second) << d;
    // Gap and sums are fine, only the loop check fails.
    EXPECT_EQ(r.failures(), std::vector<std::string>{"H3b-nonfree-loop"});
}

TEST(NonFreeLoop, OddCyclePositiveCostsAlwaysPass) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> c(0.01, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 3 + 2 * static_cast<int>(gen() % 5);  // 3..11
        Spec1d s{.p = p};
        s.gd.clear();
        s.gu.clear();
        // every cost is a multiple of the same quantum: sums are odd multiples
        const double q = c(gen);
        for (int i = 0; i < p; ++i) {
            s.gd.push_back(q);
            s.gu.push_back(q);
        }
        EXPECT_TRUE(check_nonfree_loop(SwitchingProblem(make_spec(s)), one_point()).overall());
    }
}

TEST(NonFreeLoop, EvenCycleEnumerationMatchesBruteForce) {
    std::mt19937_64 gen(23);
    std::uniform_int_distribution<int> c(0, 3);
    for (int trial = 0; trial < 300; ++trial) {
        Spec1d s{.p = 4};
        s.gd.clear();
        s.gu.clear();
        for (int i = 0; i < 4; ++i) {
            s.gd.push_back(1 + c(gen));
            s.gu.push_back(1 + c(gen));
        }
        bool zero = false;
        for (int mask = 0; mask < 16; ++mask) {
            double sum = 0.0;
            for (int l = 0; l < 4; ++l) sum += (mask >> l & 1) ? s.gu[l] : -s.gd[l];
            zero = zero || sum == 0.0;
        }
        const auto r = check_nonfree_loop(SwitchingProblem(make_spec(s)), one_point());
        EXPECT_EQ(find(r, "H3b-nonfree-loop").verdict == Verdict::Fail, zero);
    }
}

TEST(NonFreeLoop, LargeCycleFallsBackToSampling) {
    SwitchingProblem prob(make_spec(Spec1d{.p = 25}));
    const auto r = check_nonfree_loop(prob, one_point());
    const auto& c = find(r, "H3b-nonfree-loop");
    EXPECT_TRUE(c.heuristic);
    EXPECT_EQ(c.verdict, Verdict::HeuristicPass);
}

TEST(NonFreeLoop, DeterministicGivenGrid) {
    SwitchingProblem prob(fixtures::standard_spec());
    std::vector<double> xs{-1.0, 0.0, 1.0};
    const auto grid = tx_grid_1d(0.0, 1.0, 5, xs);
    EXPECT_EQ(check_nonfree_loop(prob, grid).to_text(), check_nonfree_loop(prob, grid).to_text());
}

TEST(Regularity, LinearDriftPasses) {
    auto spec = make_spec(Spec1d{.sigma = 1.0});
    spec.drift = families::affine_drift(0.0, 1.0);
    const auto r = audit_regularity(SwitchingProblem(spec), 1, 50);
    EXPECT_EQ(find(r, "H0-lipschitz-drift").verdict, Verdict::HeuristicPass);
    EXPECT_NEAR(find(r, "H0-lipschitz-drift").measured, 1.0, 1e-6);
    EXPECT_EQ(find(r, "H0-lipschitz-vol").verdict, Verdict::HeuristicPass);
}

TEST(Regularity, DecreasingInOtherModeFails) {
    auto spec = make_spec(Spec1d{});
    spec.running_reward[0] = swgame::testing::reward_fn(
        [](double, std::span<const double>, std::span<const double> y) { return -y[1]; });
    spec.reward_uses_values = true;
    const auto r = audit_regularity(SwitchingProblem(spec), 1, 50);
    const auto& c = find(r, "H5b-monotone");
    EXPECT_EQ(c.verdict, Verdict::Fail);
    EXPECT_TRUE(c.heuristic);
    ASSERT_TRUE(c.witness.has_value());
    EXPECT_EQ(c.witness->mode, 0);
}

TEST(Regularity, QuadraticTerminalExceedsLinearEnvelope) {
    auto spec = make_spec(Spec1d{});
    spec.terminal[0] = families::polynomial_terminal({0.0, 0.0, 1.0});
    spec.growth_exponent = 1;
    const auto r = audit_regularity(SwitchingProblem(spec), 1, 50);
    const auto& c = find(r, "Pig-growth");
    EXPECT_EQ(c.verdict, Verdict::Fail);
    ASSERT_TRUE(c.witness.has_value());
    EXPECT_GE(std::abs(c.witness->x.at(0)), 100.0);
}

TEST(Regularity, ConstantCostsCertifyH4) {
    const auto r = audit_regularity(SwitchingProblem(fixtures::standard_spec()), 3, 40);
    EXPECT_EQ(find(r, "H4-cost-monotone").verdict, Verdict::HeuristicPass);
    auto spec = fixtures::standard_spec();
    spec.cost_up[1] = families::affine_cost(0.3, 0.0, 0.1);
    const auto r2 = audit_regularity(SwitchingProblem(spec), 3, 40);
    EXPECT_EQ(find(r2, "H4-cost-monotone").verdict, Verdict::Uncertified);
    // uncertified is not a failure
    EXPECT_TRUE(r2.overall()) << r2.to_text();
}

TEST(Audit, StandardFixturePassesEverything) {
    const auto r = full_audit(SwitchingProblem(fixtures::standard_spec()));
    EXPECT_TRUE(r.overall()) << r.to_text();
}

// Each violation fixture trips exactly its own assumption.
struct ViolationCase {
    const char* file;
    const char* check;
};

class ViolationFixture : public ::testing::TestWithParam<ViolationCase> {};

TEST_P(ViolationFixture, FlagsExactlyTheViolatedAssumption) {
    const auto cfg = load_config(swgame::testing::fixture(GetParam().file));
    const auto r = full_audit(SwitchingProblem(cfg.problem));
    EXPECT_EQ(r.failures(), std::vector<std::string>{GetParam().check}) << r.to_text();
    for (const auto& c : r.checks)
        if (c.verdict == Verdict::Fail) EXPECT_TRUE(c.witness.has_value());
}

INSTANTIATE_TEST_SUITE_P(Fixtures, ViolationFixture,
                         ::testing::Values(ViolationCase{"violate_h2.json", "H2-consistency"},
                                           ViolationCase{"violate_h3a.json", "H3a-positive-gap"},
                                           ViolationCase{"violate_nfl.json", "H3b-nonfree-loop"},
                                           ViolationCase{"violate_h5b.json", "H5b-monotone"}));
