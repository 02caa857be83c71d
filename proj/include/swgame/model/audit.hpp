#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swgame/model/problem.hpp"

namespace swgame {

enum class Verdict { Pass, Fail, HeuristicPass, Uncertified };

const char* to_string(Verdict v);

// Where a check failed (or the sample it was judged on).
struct Witness {
    double t = 0.0;
    std::vector<double> x;
    int mode = -1;  // zero-based, -1 when not mode specific
    std::string detail;
};

struct AuditCheck {
    std::string name;
    Verdict verdict = Verdict::Pass;
    bool heuristic = false;
    double measured = 0.0;
    std::optional<Witness> witness;
    std::string note;
};

// Evidence for the standing assumptions. A Fail always carries a witness.
struct AuditReport {
    std::vector<AuditCheck> checks;

    [[nodiscard]] bool overall() const;
    // Names of failing checks.
    [[nodiscard]] std::vector<std::string> failures() const;
    void append(const AuditReport& other);
    [[nodiscard]] std::string to_text() const;
};

struct TxPoint {
    double t = 0.0;
    std::vector<double> x;
};

// Terminal consistency: h^{i+1} − g̲_{i,i+1}(T,·) ≤ h^i ≤ h^{i+1} + ḡ_{i,i+1}(T,·)
// at every grid point. Check name "H2-consistency".
AuditReport validate_consistency(const SwitchingProblem& problem,
                                 std::span<const std::vector<double>> x_grid);
AuditReport validate_consistency(const SwitchingProblem& problem, std::span<const double> x_grid_1d);

// Cost sign/gap conditions and the non-free-loop property. Every sign
// assignment φ_l ∈ {−g̲_l, +ḡ_l} of the cycle is enumerated (p ≤ 24); larger
// p falls back to seeded random sampling and is labeled heuristic.
// Check names: H3a-nonnegative, H3a-positive-gap, H3b-nonfree-loop,
// H3b-upper-sum, H3b-lower-sum.
AuditReport check_nonfree_loop(const SwitchingProblem& problem, std::span<const TxPoint> tx_grid);

struct RegularityOptions {
    double box = 5.0;               // samples x uniformly in [-box, box]^k
    double lipschitz_bound = 1e6;   // difference quotients above this fail
    double growth_factor = 4.0;     // envelope slack for the Π_g check
};

// Sample-based, explicitly heuristic checks: H0-lipschitz (b, σ),
// H5b-monotone (f^i non-decreasing in off-diagonal ȳ), Pig-growth (f^i(·,·,0)
// and h^i within the declared polynomial envelope) and H4-cost-monotone
// (certified only for x-free costs non-decreasing in t).
AuditReport audit_regularity(const SwitchingProblem& problem, std::uint64_t sampler_seed,
                             int n_samples, RegularityOptions options = {});

// Convenience grids.
std::vector<TxPoint> tx_grid_1d(double t0, double t1, int n_t, std::span<const double> xs);

}  // namespace swgame
