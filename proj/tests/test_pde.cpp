#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "swgame/errors.hpp"
#include "swgame/lattice/lattice.hpp"
#include "swgame/model/fixtures.hpp"
#include "swgame/pde/solver.hpp"

using namespace swgame;
using swgame::testing::make_spec;
using swgame::testing::Spec1d;

namespace {

GridSpec grid(double lo, double hi, int nx, int M, double T = 1.0) {
    GridSpec g;
    g.time = {0.0, T, M};
    g.space = {lo, hi, nx};
    return g;
}

// Largest |a − lattice| over the t0 slice, x within ±half of the centre.
double gap_to_lattice_t0(const ValueField& a, const LatticeValues& lat, double half) {
    double worst = 0.0;
    for (int k = 0; k < a.space().n; ++k) {
        const double x = a.space().x(k);
        if (std::abs(x) > half) continue;
        for (int i = 0; i < a.modes(); ++i)
            worst = std::max(worst, std::abs(a.at(0, k, i) - lat.field.interpolate(0, x, i)));
    }
    return worst;
}

double upper_violation(const SwitchingProblem& prob, const ValueField& f) {
    double worst = 0.0;
    for (int j = 0; j < f.time().n_steps; ++j)
        for (int k = 0; k < f.space().n; ++k)
            for (int i = 0; i < f.modes(); ++i) {
                const double x = f.space().x(k);
                worst = std::max(worst, f.at(j, k, i) - f.at(j, k, prob.next(i)) -
                                            prob.cost_up1(i, f.time().time(j), x));
            }
    return worst;
}

}  // namespace

TEST(Step, ConstantsAreFixed) {
    SwitchingProblem prob(fixtures::with_constant_costs(
        make_spec(Spec1d{.p = 2, .b = 0.3, .sigma = 0.7}), 1.0));
    const auto g = grid(-2.0, 2.0, 41, 100);
    std::vector<double> w(41 * 2);
    for (int k = 0; k < 41; ++k) {
        w[k * 2] = 1.5;
        w[k * 2 + 1] = -0.25;
    }
    const auto c = step_parabolic(w, prob, g, 10);
    for (std::size_t q = 0; q < w.size(); ++q) EXPECT_NEAR(c[q], w[q], 1e-15);
}

TEST(Step, UpwindIsExactOnLinearData) {
    SwitchingProblem prob(make_spec(Spec1d{.b = 1.0}));
    const auto g = grid(-1.0, 1.0, 21, 50);
    std::vector<double> w(21 * 2);
    for (int k = 0; k < 21; ++k) w[k * 2] = w[k * 2 + 1] = g.space.x(k);
    const auto c = step_parabolic(w, prob, g, 0);
    for (int k = 0; k < 20; ++k) EXPECT_NEAR(c[k * 2], g.space.x(k) + 0.02, 1e-14) << k;
}

TEST(Step, HeatEigenfunctionDecay) {
    SwitchingProblem prob(make_spec(Spec1d{.T = 1e-3, .sigma = std::sqrt(2.0)}));
    const double L = 1.0;
    const auto g = grid(0.0, L, 201, 100, 1e-3);
    std::vector<double> w(201 * 2);
    for (int k = 0; k < 201; ++k) w[k * 2] = w[k * 2 + 1] = std::sin(std::numbers::pi * g.space.x(k) / L);
    const auto c = step_parabolic(w, prob, g, 0);
    const double dt = g.time.dt();
    const double expect = 1.0 - std::exp(-std::numbers::pi * std::numbers::pi * dt / (L * L));
    for (int k = 20; k <= 180; k += 20) {
        const double decay = 1.0 - c[k * 2] / w[k * 2];
        EXPECT_NEAR(decay, expect, 0.02 * expect) << "x=" << g.space.x(k);
    }
}

TEST(Step, CflViolationReportsWorstPoint) {
    SwitchingProblem prob(make_spec(Spec1d{.sigma = 1.0}));
    const auto g = grid(-1.0, 1.0, 201, 10);
    std::vector<double> w(201 * 2, 0.0);
    try {
        (void)step_parabolic(w, prob, g, 0);
        FAIL();
    } catch (const CflError& e) {
        EXPECT_GT(e.ratio(), 1.0);
        EXPECT_GE(e.worst_x(), -1.0);
        EXPECT_LE(e.worst_x(), 1.0);
    }
}

TEST(Direct, DeterministicFixedPoint) {
    SwitchingProblem prob(fixtures::deterministic_spec());
    const auto g = default_grid(prob, 0.0, 20, 11);
    for (const auto& v : {solve_minmax(prob, g), solve_maxmin(prob, g)}) {
        for (int k = 0; k < 11; ++k) {
            EXPECT_DOUBLE_EQ(v.at(0, k, 0), 9.0);
            EXPECT_DOUBLE_EQ(v.at(0, k, 1), 10.0);
            EXPECT_EQ(v.at(20, k, 0), 0.0);
            EXPECT_EQ(v.at(20, k, 1), 10.0);
        }
    }
}

TEST(Direct, TerminalSliceAndBarriersOnStandard) {
    SwitchingProblem prob(fixtures::standard_spec());
    const auto g = default_grid(prob, 0.0, 200, 101);
    const auto v = solve_minmax(prob, g);
    EXPECT_EQ(v.meta().provenance, Provenance::DirectMinmax);
    for (int k = 0; k < 101; ++k)
        for (int i = 0; i < 3; ++i) EXPECT_EQ(v.at(200, k, i), prob.terminal1(i, g.space.x(k)));
    const auto bv = barrier_violation(prob, v);
    EXPECT_LE(bv.lower, 1e-9);
    EXPECT_LE(bv.upper, 1e-9);
    EXPECT_LE(v.meta().clamp_residual, 1e-10);
}

TEST(Direct, MaxMinEqualsMinMaxOnSeparatedFixtures) {
    for (auto spec : {fixtures::standard_spec(), fixtures::game_spec(),
                      fixtures::with_constant_costs(fixtures::standard_spec(), 0.05),
                      make_spec(Spec1d{.p = 4, .b = -0.1, .sigma = 0.3, .f = {0.2, -0.1, 0.4, 0},
                                       .h = {0, 0.1, 0.2, 0.3}, .gd = {0.1, 0.2, 0.3, 0.4},
                                       .gu = {0.3, 0.1, 0.2, 0.05}})}) {
        SwitchingProblem prob(spec);
        const auto g = default_grid(prob, 0.0, 150, 61);
        const auto a = solve_minmax(prob, g);
        const auto b = solve_maxmin(prob, g);
        EXPECT_EQ(b.meta().provenance, Provenance::DirectMaxmin);
        EXPECT_LE(sup_gap(compare_fields(a, b)), 1e-9);
    }
}

TEST(Direct, HugeCostsMatchLatticeExpectation) {
    SwitchingProblem prob(fixtures::with_constant_costs(fixtures::standard_spec(), 1e6));
    const auto g = default_grid(prob, 0.0, 100, 101);
    const auto v = solve_minmax(prob, g);
    const int levels = levels_for_half_width(prob, 0.0, 0.0, 100, 3.0);
    const auto lat = backward_induct(prob, build_lattice(prob, 0.0, 0.0, 100, levels));
    EXPECT_LE(gap_to_lattice_t0(v, lat, 1.5), 5e-2);
}

TEST(Direct, ThreadCountInvariant) {
    SwitchingProblem prob(fixtures::standard_spec());
    auto g = default_grid(prob, 0.0, 100, 51);
    const auto a = solve_minmax(prob, g);
    g.threads = 4;
    EXPECT_EQ(solve_minmax(prob, g).values(), a.values());
}

TEST(Direct, RaisingTerminalNeverLowersSolution) {
    SwitchingProblem base(fixtures::standard_spec());
    const auto g = default_grid(base, 0.0, 100, 51);
    const auto v0 = solve_minmax(base, g);
    for (int mode = 0; mode < 3; ++mode) {
        auto spec = fixtures::standard_spec();
        auto old = spec.terminal[mode].fn;
        spec.terminal[mode].fn = [=](std::span<const double> x) { return old(x) + 0.2 * std::exp(-x[0] * x[0]); };
        const auto v1 = solve_minmax(SwitchingProblem(spec), g);
        for (std::size_t q = 0; q < v0.values().size(); ++q)
            ASSERT_GE(v1.values()[q], v0.values()[q] - 1e-12) << mode;
    }
}

TEST(Penalized, ZeroPenaltyEqualsHugeCostDirect) {
    // ȳ-free rewards: explicit and same-slice f coincide
    auto spec = fixtures::game_spec();
    SwitchingProblem prob(spec);
    SwitchingProblem huge(fixtures::with_constant_costs(spec, 1e6));
    const auto g = default_grid(prob, 0.0, 200, 81);
    const auto a = solve_penalized(prob, g, 0.0, 0.0);
    const auto b = solve_minmax(huge, g);
    EXPECT_EQ(a.meta().provenance, Provenance::Penalized);
    EXPECT_LE(sup_gap(compare_fields(a, b)), 1e-8);
}

TEST(Penalized, UpperViolationShrinksLikeOneOverM) {
    SwitchingProblem prob(fixtures::standard_spec());
    auto g = default_grid(prob, 0.0, 1500, 101);
    std::vector<double> logm, logv;
    for (double m : {10.0, 100.0, 1000.0}) {
        const double v = upper_violation(prob, solve_penalized(prob, g, m, 0.0));
        ASSERT_GT(v, 0.0);
        logm.push_back(std::log(m));
        logv.push_back(std::log(v));
    }
    const double mx = (logm[0] + logm[1] + logm[2]) / 3, my = (logv[0] + logv[1] + logv[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int a = 0; a < 3; ++a) {
        sxy += (logm[a] - mx) * (logv[a] - my);
        sxx += (logm[a] - mx) * (logm[a] - mx);
    }
    EXPECT_NEAR(sxy / sxx, -1.0, 0.2);
}

TEST(Penalized, StiffPenaltyFailsCfl) {
    SwitchingProblem prob(fixtures::standard_spec());
    const auto g = default_grid(prob, 0.0, 100, 51);
    EXPECT_THROW(solve_penalized(prob, g, 1000.0, 0.0), CflError);
}

class LadderTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        prob_ = std::make_unique<SwitchingProblem>(fixtures::standard_spec());
        grid_ = default_grid(*prob_, 0.0, 200, 61);
        direct_ = solve_minmax(*prob_, grid_);
        dec_ = run_ladder(*prob_, grid_, LadderSchedule::doubling(6), LadderDirection::Decreasing);
        inc_ = run_ladder(*prob_, grid_, LadderSchedule::doubling(6), LadderDirection::Increasing);
    }
    static inline std::unique_ptr<SwitchingProblem> prob_;
    static inline GridSpec grid_;
    static inline ValueField direct_;
    static inline LadderResult dec_, inc_;
};

TEST_F(LadderTest, RungsAreMonotone) {
    ASSERT_EQ(dec_.rungs.size(), 7u);
    ASSERT_EQ(inc_.rungs.size(), 7u);
    for (std::size_t r = 1; r < 7; ++r)
        for (std::size_t q = 0; q < direct_.values().size(); ++q) {
            ASSERT_LE(dec_.rungs[r].values()[q], dec_.rungs[r - 1].values()[q] + 1e-8);
            ASSERT_GE(inc_.rungs[r].values()[q], inc_.rungs[r - 1].values()[q] - 1e-8);
        }
}

TEST_F(LadderTest, SandwichAtEveryRung) {
    for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t q = 0; q < direct_.values().size(); ++q) {
            ASSERT_LE(inc_.rungs[r].values()[q], direct_.values()[q] + 1e-6) << r;
            ASSERT_GE(dec_.rungs[r].values()[q], direct_.values()[q] - 1e-6) << r;
        }
}

TEST_F(LadderTest, LimitsCloseToDirect) {
    EXPECT_LE(sup_gap(compare_fields(dec_.limit, inc_.limit)), 5e-2);
    EXPECT_LE(sup_gap(compare_fields(dec_.limit, direct_)), 5e-2);
    EXPECT_LE(sup_gap(compare_fields(inc_.limit, direct_)), 5e-2);
    EXPECT_EQ(dec_.limit.meta().provenance, Provenance::LadderDecreasing);
    EXPECT_EQ(inc_.limit.meta().provenance, Provenance::LadderIncreasing);
    // Cauchy gaps shrink along the ladder
    EXPECT_LT(dec_.cauchy_gaps.back(), dec_.cauchy_gaps.front());
}

TEST_F(LadderTest, OneRungIsTheReflectedPenalizedSolve) {
    LadderSchedule one;
    one.penalties = {8.0};
    const auto r = run_ladder(*prob_, grid_, one, LadderDirection::Decreasing);
    ASSERT_EQ(r.rungs.size(), 1u);
    EXPECT_EQ(r.limit.values(),
              solve_reflected_penalized(*prob_, grid_, LadderDirection::Decreasing, 8.0).values());
}

TEST(Ladder, ScheduleValidation) {
    SwitchingProblem prob(fixtures::standard_spec());
    const auto g = default_grid(prob, 0.0, 50, 21);
    LadderSchedule bad;
    bad.penalties = {1.0, 1.0};
    EXPECT_THROW(run_ladder(prob, g, bad, LadderDirection::Decreasing), ConfigError);
    bad.penalties = {};
    EXPECT_THROW(run_ladder(prob, g, bad, LadderDirection::Decreasing), ConfigError);
}

TEST(Ladder, OrderBreachIsReported) {
    SwitchingProblem prob(fixtures::standard_spec());
    const auto g = default_grid(prob, 0.0, 100, 31);
    LadderSchedule s;
    s.penalties = {1.0, 2.0};
    s.monotone_tolerance = -1.0;  // any rung pair now counts as a breach
    EXPECT_THROW(run_ladder(prob, g, s, LadderDirection::Increasing), SchemeOrderError);
}

TEST(Refinement, ErrorHalvesAgainstFineLattice) {
    SwitchingProblem prob(fixtures::standard_spec());
    const int fine = 6400;
    const int levels = levels_for_half_width(prob, 0.0, 0.0, fine, 3.0);
    const auto ref = backward_induct(prob, build_lattice(prob, 0.0, 0.0, fine, levels));
    std::vector<double> errs;
    for (auto [M, nx] : {std::pair{100, 51}, std::pair{400, 101}, std::pair{1600, 201}}) {
        const auto v = solve_minmax(prob, default_grid(prob, 0.0, M, nx));
        errs.push_back(gap_to_lattice_t0(v, ref, 1.5));
    }
    for (std::size_t a = 1; a < errs.size(); ++a) {
        const double ratio = errs[a - 1] / errs[a];
        EXPECT_GE(ratio, 1.5) << errs[a - 1] << " -> " << errs[a];
        EXPECT_LE(ratio, 3.0) << errs[a - 1] << " -> " << errs[a];
    }
}
