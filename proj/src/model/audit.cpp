#include "swgame/model/audit.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <sstream>

#include "swgame/errors.hpp"
#include "swgame/rng.hpp"

namespace swgame {

namespace {

std::string point_str(std::span<const double> x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

double finite_or_throw(double v, const std::string& field, int mode, double t,
                       std::span<const double> x) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << field << "[" << mode + 1 << "] is not finite at t=" << t << ", x=" << point_str(x);
        throw EvaluationError(os.str());
    }
    return v;
}

AuditCheck pass(std::string name, double measured, bool heuristic = false) {
    AuditCheck c;
    c.name = std::move(name);
    c.verdict = heuristic ? Verdict::HeuristicPass : Verdict::Pass;
    c.heuristic = heuristic;
    c.measured = measured;
    return c;
}

AuditCheck fail(std::string name, double measured, Witness w, bool heuristic = false) {
    AuditCheck c;
    c.name = std::move(name);
    c.verdict = Verdict::Fail;
    c.heuristic = heuristic;
    c.measured = measured;
    c.witness = std::move(w);
    return c;
}

// Smallest |Σ φ_l| over all 2^p assignments by Gray-code enumeration.
struct LoopScan {
    double min_abs = 0.0;
    std::uint64_t assignment = 0;  // bit l set ⇒ φ_l = +ḡ_l
};

LoopScan scan_cycle(const std::vector<double>& down, const std::vector<double>& up) {
    const int p = static_cast<int>(down.size());
    double sum = 0.0;
    for (double g : down) sum -= g;
    LoopScan best{std::abs(sum), 0};
    std::uint64_t code = 0;
    const std::uint64_t total = std::uint64_t{1} << p;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int bit = std::countr_zero(k);
        const std::uint64_t mask = std::uint64_t{1} << bit;
        const double delta = up[bit] + down[bit];
        if (code & mask) {
            sum -= delta;
        } else {
            sum += delta;
        }
        code ^= mask;
        if (std::abs(sum) < best.min_abs) best = {std::abs(sum), code};
    }
    // Recompute the winner exactly; the running sum accumulates rounding.
    double exact = 0.0;
    for (int l = 0; l < p; ++l) exact += (best.assignment >> l & 1u) ? up[l] : -down[l];
    best.min_abs = std::abs(exact);
    return best;
}

std::string assignment_str(std::uint64_t a, const std::vector<double>& down,
                           const std::vector<double>& up) {
    std::ostringstream os;
    os << "assignment (";
    for (std::size_t l = 0; l < down.size(); ++l) {
        if (l) os << ", ";
        if (a >> l & 1u) {
            os << "+ḡ" << l + 1 << "=" << up[l];
        } else {
            os << "-g̲" << l + 1 << "=" << -down[l];
        }
    }
    os << ")";
    return os.str();
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::HeuristicPass: return "heuristic-pass";
        case Verdict::Uncertified: return "uncertified";
    }
    return "?";
}

bool AuditReport::overall() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const AuditCheck& c) { return c.verdict == Verdict::Fail; });
}

std::vector<std::string> AuditReport::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (c.verdict == Verdict::Fail) out.push_back(c.name);
    return out;
}

void AuditReport::append(const AuditReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

std::string AuditReport::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << c.name << ": " << to_string(c.verdict) << (c.heuristic && c.verdict == Verdict::Fail ? " (heuristic)" : "")
           << " measured=" << c.measured;
        if (c.witness) {
            os << " witness{t=" << c.witness->t << ", x=" << point_str(c.witness->x);
            if (c.witness->mode >= 0) os << ", mode=" << c.witness->mode + 1;
            if (!c.witness->detail.empty()) os << ", " << c.witness->detail;
            os << "}";
        }
        if (!c.note.empty()) os << " note: " << c.note;
        os << "\n";
    }
    os << "overall: " << (overall() ? "pass" : "fail") << "\n";
    return os.str();
}

AuditReport validate_consistency(const SwitchingProblem& problem,
                                 std::span<const std::vector<double>> x_grid) {
    if (x_grid.empty()) throw ConfigError("validate_consistency: empty grid");
    const int p = problem.modes();
    const double T = problem.horizon();
    double worst = std::numeric_limits<double>::infinity();
    std::optional<Witness> witness;
    for (const auto& x : x_grid) {
        std::vector<double> h(p);
        for (int i = 0; i < p; ++i) h[i] = finite_or_throw(problem.terminal(i, x), "terminal", i, T, x);
        for (int i = 0; i < p; ++i) {
            const int j = problem.next(i);
            const double gd = finite_or_throw(problem.cost_down(i, T, x), "cost_down", i, T, x);
            const double gu = finite_or_throw(problem.cost_up(i, T, x), "cost_up", i, T, x);
            const double lower_slack = h[i] - (h[j] - gd);
            const double upper_slack = (h[j] + gu) - h[i];
            const double slack = std::min(lower_slack, upper_slack);
            const double tol = 1e-12 * (1.0 + std::abs(h[i]) + std::abs(h[j]));
            if (slack < worst) worst = slack;
            if (slack < -tol && !witness) {
                std::ostringstream os;
                os << "h" << i + 1 << "=" << h[i] << " outside [" << h[j] - gd << ", " << h[j] + gu
                   << "], slack " << slack;
                witness = Witness{T, x, i, os.str()};
            }
        }
    }
    AuditReport r;
    r.checks.push_back(witness ? fail("H2-consistency", worst, *witness)
                               : pass("H2-consistency", worst));
    return r;
}

AuditReport validate_consistency(const SwitchingProblem& problem, std::span<const double> xs) {
    std::vector<std::vector<double>> pts;
    pts.reserve(xs.size());
    for (double x : xs) pts.push_back({x});
    return validate_consistency(problem, std::span<const std::vector<double>>(pts));
}

AuditReport check_nonfree_loop(const SwitchingProblem& problem, std::span<const TxPoint> tx_grid) {
    if (tx_grid.empty()) throw ConfigError("check_nonfree_loop: empty grid");
    const int p = problem.modes();
    const bool exhaustive = p <= 24;
    constexpr int kSampledAssignments = 1 << 16;

    double min_cost = std::numeric_limits<double>::infinity();
    double min_gap = std::numeric_limits<double>::infinity();
    double min_loop = std::numeric_limits<double>::infinity();
    double min_up_sum = std::numeric_limits<double>::infinity();
    double min_down_sum = std::numeric_limits<double>::infinity();
    std::optional<Witness> w_sign, w_gap, w_loop, w_up, w_down;

    std::vector<double> down(p), up(p);
    for (const auto& pt : tx_grid) {
        for (int i = 0; i < p; ++i) {
            down[i] = finite_or_throw(problem.cost_down(i, pt.t, pt.x), "cost_down", i, pt.t, pt.x);
            up[i] = finite_or_throw(problem.cost_up(i, pt.t, pt.x), "cost_up", i, pt.t, pt.x);
            const double lo = std::min(down[i], up[i]);
            if (lo < min_cost) min_cost = lo;
            if (lo < 0.0 && !w_sign) {
                std::ostringstream os;
                os << "negative cost g̲=" << down[i] << " ḡ=" << up[i];
                w_sign = Witness{pt.t, pt.x, i, os.str()};
            }
            const double gap = down[i] + up[i];
            if (gap < min_gap) min_gap = gap;
            if (!(gap > 0.0) && !w_gap) {
                std::ostringstream os;
                os << "g̲+ḡ=" << gap;
                w_gap = Witness{pt.t, pt.x, i, os.str()};
            }
        }
        double scale = 1.0;
        double up_sum = 0.0;
        double down_sum = 0.0;
        for (int i = 0; i < p; ++i) {
            scale += std::max(std::abs(down[i]), std::abs(up[i]));
            up_sum += up[i];
            down_sum += down[i];
        }
        const double tol = 1e-12 * scale;

        LoopScan scan;
        if (exhaustive) {
            scan = scan_cycle(down, up);
        } else {
            const CounterRng rng(0x5eed, 7);
            scan.min_abs = std::numeric_limits<double>::infinity();
            for (int s = 0; s < kSampledAssignments; ++s) {
                std::uint64_t a = 0;
                double sum = 0.0;
                for (int l = 0; l < p; ++l) {
                    const bool plus = rng.uniform(static_cast<std::uint64_t>(s), l) < 0.5;
                    if (plus) a |= std::uint64_t{1} << l;
                    sum += plus ? up[l] : -down[l];
                }
                if (std::abs(sum) < scan.min_abs) scan = {std::abs(sum), a};
            }
        }
        if (scan.min_abs < min_loop) min_loop = scan.min_abs;
        if (scan.min_abs <= tol && !w_loop)
            w_loop = Witness{pt.t, pt.x, -1,
                             "zero-cost cycle: " + assignment_str(scan.assignment, down, up)};
        if (up_sum < min_up_sum) min_up_sum = up_sum;
        if (!(up_sum > 0.0) && !w_up) {
            std::ostringstream os;
            os << "Σḡ=" << up_sum;
            w_up = Witness{pt.t, pt.x, -1, os.str()};
        }
        if (down_sum < min_down_sum) min_down_sum = down_sum;
        if (!(down_sum > 0.0) && !w_down) {
            std::ostringstream os;
            os << "Σg̲=" << down_sum;
            w_down = Witness{pt.t, pt.x, -1, os.str()};
        }
    }

    AuditReport r;
    r.checks.push_back(w_sign ? fail("H3a-nonnegative", min_cost, *w_sign)
                              : pass("H3a-nonnegative", min_cost));
    r.checks.push_back(w_gap ? fail("H3a-positive-gap", min_gap, *w_gap)
                             : pass("H3a-positive-gap", min_gap));
    AuditCheck loop = w_loop ? fail("H3b-nonfree-loop", min_loop, *w_loop, !exhaustive)
                             : pass("H3b-nonfree-loop", min_loop, !exhaustive);
    if (!exhaustive) loop.note = "p > 24: sampled assignments instead of full enumeration";
    r.checks.push_back(std::move(loop));
    r.checks.push_back(w_up ? fail("H3b-upper-sum", min_up_sum, *w_up)
                            : pass("H3b-upper-sum", min_up_sum));
    r.checks.push_back(w_down ? fail("H3b-lower-sum", min_down_sum, *w_down)
                              : pass("H3b-lower-sum", min_down_sum));
    return r;
}

AuditReport audit_regularity(const SwitchingProblem& problem, std::uint64_t sampler_seed,
                             int n_samples, RegularityOptions opt) {
    if (n_samples < 2) throw ConfigError("audit_regularity: n_samples must be at least 2");
    const int p = problem.modes();
    const int k = problem.dim_x();
    const int d = problem.dim_w();
    const double T = problem.horizon();
    const CounterRng rng(sampler_seed, 11);
    std::uint64_t draw = 0;
    auto uni = [&](std::uint64_t stream) { return rng.uniform(stream, draw++); };

    AuditReport r;

    // Lipschitz quotients of b and σ at three distance scales.
    {
        double worst_b = 0.0;
        double worst_s = 0.0;
        std::optional<Witness> wb, ws;
        std::vector<double> x(k), x2(k), b1(k), b2(k), s1(k * d), s2(k * d);
        const double scales[] = {1.0, 1e-2, 1e-4};
        for (int s = 0; s < n_samples; ++s) {
            const double t = T * uni(1);
            for (auto& v : x) v = opt.box * (2.0 * uni(1) - 1.0);
            const double delta = scales[s % 3] * (0.5 + uni(1));
            double dist2 = 0.0;
            for (int q = 0; q < k; ++q) {
                x2[q] = x[q] + delta * (2.0 * uni(1) - 1.0);
                dist2 += (x2[q] - x[q]) * (x2[q] - x[q]);
            }
            const double dist = std::sqrt(dist2);
            if (dist == 0.0) continue;
            problem.drift(t, x, b1);
            problem.drift(t, x2, b2);
            problem.vol(t, x, s1);
            problem.vol(t, x2, s2);
            double nb = 0.0, ns = 0.0;
            for (int q = 0; q < k; ++q) nb += (b1[q] - b2[q]) * (b1[q] - b2[q]);
            for (int q = 0; q < k * d; ++q) ns += (s1[q] - s2[q]) * (s1[q] - s2[q]);
            const double qb = std::sqrt(nb) / dist;
            const double qs = std::sqrt(ns) / dist;
            if (!std::isfinite(qb) || qb > worst_b) worst_b = std::isfinite(qb) ? qb : INFINITY;
            if (!std::isfinite(qs) || qs > worst_s) worst_s = std::isfinite(qs) ? qs : INFINITY;
            if ((!std::isfinite(qb) || qb > opt.lipschitz_bound) && !wb) {
                std::ostringstream os;
                os << "difference quotient " << qb << " toward " << point_str(x2);
                wb = Witness{t, x, -1, os.str()};
            }
            if ((!std::isfinite(qs) || qs > opt.lipschitz_bound) && !ws) {
                std::ostringstream os;
                os << "difference quotient " << qs << " toward " << point_str(x2);
                ws = Witness{t, x, -1, os.str()};
            }
        }
        r.checks.push_back(wb ? fail("H0-lipschitz-drift", worst_b, *wb, true)
                              : pass("H0-lipschitz-drift", worst_b, true));
        r.checks.push_back(ws ? fail("H0-lipschitz-vol", worst_s, *ws, true)
                              : pass("H0-lipschitz-vol", worst_s, true));
    }

    // Off-diagonal monotonicity of f^i in ȳ.
    {
        double worst = std::numeric_limits<double>::infinity();
        std::optional<Witness> w;
        std::vector<double> x(k), y(p), y2(p);
        for (int i = 0; i < p; ++i) {
            for (int l = 0; l < p; ++l) {
                if (l == i) continue;
                for (int s = 0; s < n_samples; ++s) {
                    const double t = T * uni(2);
                    for (auto& v : x) v = opt.box * (2.0 * uni(2) - 1.0);
                    for (auto& v : y) v = opt.box * (2.0 * uni(2) - 1.0);
                    y2 = y;
                    const double bump = 1e-3 + opt.box * uni(2);
                    y2[l] += bump;
                    const double f1 = problem.reward(i, t, x, y);
                    const double f2 = problem.reward(i, t, x, y2);
                    const double slope = (f2 - f1) / bump;
                    if (slope < worst) worst = slope;
                    if (f2 < f1 - 1e-12 * (1.0 + std::abs(f1)) && !w) {
                        std::ostringstream os;
                        os << "raising y" << l + 1 << " from " << y[l] << " to " << y2[l]
                           << " lowers f" << i + 1 << " from " << f1 << " to " << f2;
                        w = Witness{t, x, i, os.str()};
                    }
                }
            }
        }
        r.checks.push_back(w ? fail("H5b-monotone", worst, *w, true)
                             : pass("H5b-monotone", worst, true));
    }

    // Polynomial growth envelope: |g(x)| / (1 + |x|^γ) at radii 1, 10, 100, 1000.
    {
        const double radii[] = {1.0, 10.0, 100.0, 1000.0};
        const int gamma = problem.growth_exponent();
        std::vector<double> zeros(p, 0.0), x(k);
        double worst_excess = 0.0;
        std::optional<Witness> w;
        auto probe = [&](const std::string& label, int mode, auto&& eval) {
            double ratio[4] = {0, 0, 0, 0};
            std::vector<double> at[4];
            double tt[4] = {0, 0, 0, 0};
            for (int ri = 0; ri < 4; ++ri) {
                for (int dir = 0; dir < 4; ++dir) {
                    const double t = T * uni(3);
                    double norm2 = 0.0;
                    for (auto& v : x) {
                        v = 2.0 * uni(3) - 1.0;
                        norm2 += v * v;
                    }
                    if (k == 1) x[0] = (dir % 2 == 0) ? 1.0 : -1.0, norm2 = 1.0;
                    const double scale = radii[ri] / std::sqrt(norm2);
                    for (auto& v : x) v *= scale;
                    const double val = std::abs(eval(t, x));
                    const double q = val / (1.0 + std::pow(radii[ri], gamma));
                    if (!(q <= ratio[ri])) {
                        ratio[ri] = std::isfinite(q) ? q : INFINITY;
                        at[ri] = x;
                        tt[ri] = t;
                    }
                }
            }
            const double envelope = std::max(ratio[0], ratio[1]);
            for (int ri = 2; ri < 4; ++ri) {
                const double excess = ratio[ri] / std::max(envelope, 1e-300);
                if (excess > worst_excess) worst_excess = excess;
                if (!(ratio[ri] <= opt.growth_factor * envelope + 1e-12) && !w) {
                    std::ostringstream os;
                    os << label << " grows faster than |x|^" << gamma << ": ratio " << ratio[ri]
                       << " at radius " << radii[ri] << " vs envelope " << envelope;
                    w = Witness{tt[ri], at[ri], mode, os.str()};
                }
            }
        };
        for (int i = 0; i < p; ++i) {
            probe("f" + std::to_string(i + 1) + "(t,x,0)", i,
                  [&](double t, const std::vector<double>& xx) { return problem.reward(i, t, xx, zeros); });
            probe("h" + std::to_string(i + 1), i,
                  [&](double, const std::vector<double>& xx) { return problem.terminal(i, xx); });
            probe("g̲" + std::to_string(i + 1), i,
                  [&](double t, const std::vector<double>& xx) { return problem.cost_down(i, t, xx); });
            probe("ḡ" + std::to_string(i + 1), i,
                  [&](double t, const std::vector<double>& xx) { return problem.cost_up(i, t, xx); });
        }
        r.checks.push_back(w ? fail("Pig-growth", worst_excess, *w, true)
                             : pass("Pig-growth", worst_excess, true));
    }

    // Pathwise monotone costs: only certifiable for x-free costs non-decreasing in t.
    {
        bool certified = true;
        std::string why;
        std::vector<double> x(k);
        constexpr int kTimes = 11;
        for (int i = 0; i < p && certified; ++i) {
            for (int side = 0; side < 2 && certified; ++side) {
                auto cost = [&](double t, const std::vector<double>& xx) {
                    return side == 0 ? problem.cost_down(i, t, xx) : problem.cost_up(i, t, xx);
                };
                double prev = -std::numeric_limits<double>::infinity();
                for (int a = 0; a < kTimes && certified; ++a) {
                    const double t = T * a / (kTimes - 1);
                    std::fill(x.begin(), x.end(), 0.0);
                    const double ref = cost(t, x);
                    for (int s = 0; s < 5; ++s) {
                        for (auto& v : x) v = opt.box * (2.0 * uni(4) - 1.0);
                        if (std::abs(cost(t, x) - ref) > 1e-12 * (1.0 + std::abs(ref))) {
                            certified = false;
                            why = "cost of mode " + std::to_string(i + 1) + " depends on x";
                            break;
                        }
                    }
                    if (certified && ref < prev) {
                        certified = false;
                        why = "cost of mode " + std::to_string(i + 1) + " decreases in t";
                    }
                    prev = ref;
                }
            }
        }
        AuditCheck c;
        c.name = "H4-cost-monotone";
        c.heuristic = true;
        c.verdict = certified ? Verdict::HeuristicPass : Verdict::Uncertified;
        c.measured = certified ? 1.0 : 0.0;
        c.note = certified ? "x-free costs non-decreasing in t" : why;
        r.checks.push_back(std::move(c));
    }
    return r;
}

std::vector<TxPoint> tx_grid_1d(double t0, double t1, int n_t, std::span<const double> xs) {
    std::vector<TxPoint> out;
    out.reserve(static_cast<std::size_t>(n_t) * xs.size());
    for (int a = 0; a < n_t; ++a) {
        const double t = n_t == 1 ? t0 : t0 + (t1 - t0) * a / (n_t - 1);
        for (double x : xs) out.push_back({t, {x}});
    }
    return out;
}

}  // namespace swgame
