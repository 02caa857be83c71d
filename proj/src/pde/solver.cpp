#include "swgame/pde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swgame/errors.hpp"
#include "swgame/model/driver.hpp"
#include "swgame/parallel.hpp"

namespace swgame {

namespace {

void require_1d(const SwitchingProblem& problem) {
    if (problem.dim_x() != 1) throw ConfigError("pde_solver: finite differences require dim_x = 1");
}

void validate_grid(const SwitchingProblem& problem, const GridSpec& grid) {
    require_1d(problem);
    if (grid.time.n_steps < 1) throw ConfigError("pde_solver: n_steps must be >= 1");
    if (std::abs(grid.time.horizon - problem.horizon()) > 1e-12 * (1.0 + problem.horizon()))
        throw ConfigError("pde_solver: grid horizon differs from the problem horizon");
    if (grid.space.n < 3 || !(grid.space.x_max > grid.space.x_min))
        throw ConfigError("pde_solver: need n_x >= 3 and x_min < x_max");
}

double sigma_max(const SwitchingProblem& problem, double t0, int n_steps, double lo, double hi,
                 int n_x) {
    const double dt = (problem.horizon() - t0) / n_steps;
    double s2 = 0.0;
    for (int j = 0; j < n_steps; ++j)
        for (int k = 0; k < n_x; ++k) {
            const double x = n_x == 1 ? lo : lo + (hi - lo) * k / (n_x - 1);
            s2 = std::max(s2, problem.variance1(t0 + j * dt, x));
        }
    return std::sqrt(s2);
}

enum class Mode { Clamp, Explicit };

struct Scheme {
    Mode mode = Mode::Clamp;
    ClampKind kind = ClampKind::MinMax;
    double m = 0.0;
    double n = 0.0;
    Provenance provenance = Provenance::DirectMinmax;
};

struct NodeStats {
    double residual = 0.0;
    int picard = 0;
    bool failed = false;
};

ValueField run_scheme(const SwitchingProblem& problem, const GridSpec& grid, const Scheme& s) {
    validate_grid(problem, grid);
    const int p = problem.modes();
    const int nx = grid.space.n;
    const int M = grid.time.n_steps;
    const double dt = grid.time.dt();
    FieldMeta meta;
    meta.provenance = s.provenance;
    meta.m = s.m;
    meta.n = s.n;
    ValueField V(grid.time, grid.space, p, meta);
    const std::vector<double> xs = grid.space.points();

    for (int k = 0; k < nx; ++k)
        for (int i = 0; i < p; ++i) V.at(M, k, i) = problem.terminal1(i, xs[k]);

    std::vector<NodeStats> stats(nx);
    for (int j = M - 1; j >= 0; --j) {
        const double t = grid.time.time(j);
        const ParabolicStencil st = parabolic_stencil(problem, grid, j);
        check_cfl(st, grid, s.m, s.n);
        V.meta().cfl_ratio = std::max(V.meta().cfl_ratio, st.worst_ratio + dt * (s.m + s.n));

        parallel_for(static_cast<std::size_t>(nx), grid.threads, [&](std::size_t b, std::size_t e) {
            std::vector<double> base(p), c(p), v(p), prev(p), gd(p), gu(p);
            for (std::size_t kk = b; kk < e; ++kk) {
                const int k = static_cast<int>(kk);
                const double x = xs[k];
                auto w = V.node(j + 1, k);
                for (int i = 0; i < p; ++i) {
                    double E = st.mid[k] * w[i];
                    if (k > 0) E += st.lo[k] * V.at(j + 1, k - 1, i);
                    if (k + 1 < nx) E += st.hi[k] * V.at(j + 1, k + 1, i);
                    gd[i] = problem.cost_down1(i, t, x);
                    gu[i] = problem.cost_up1(i, t, x);
                    const double pen =
                        penalty_term(w[i], w[problem.next(i)], gd[i], gu[i], s.m, s.n);
                    base[i] = E + dt * pen;
                    const double f = problem.reward1(i, t, x, w);
                    if (!std::isfinite(f) || !std::isfinite(base[i])) {
                        std::ostringstream os;
                        os << "non-finite value in mode " << i + 1 << " at t=" << t << ", x=" << x;
                        throw EvaluationError(os.str());
                    }
                    c[i] = base[i] + dt * f;
                }
                auto out = V.node(j, k);
                NodeStats& ns = stats[k];
                ns = {};
                if (s.mode == Mode::Explicit) {
                    std::copy(c.begin(), c.end(), out.begin());
                    continue;
                }
                ns.residual = clamp_modes(c, gd, gu, v, s.kind).residual;
                if (problem.reward_uses_values()) {
                    bool settled = false;
                    for (int it = 0; it < grid.max_picard; ++it) {
                        prev = v;
                        for (int i = 0; i < p; ++i)
                            c[i] = base[i] + dt * problem.reward1(i, t, x, prev);
                        ns.residual = clamp_modes(c, gd, gu, v, s.kind).residual;
                        ++ns.picard;
                        double d = 0.0;
                        for (int i = 0; i < p; ++i) d = std::max(d, std::abs(v[i] - prev[i]));
                        if (d < grid.tol_picard) {
                            settled = true;
                            break;
                        }
                    }
                    ns.failed = !settled;
                }
                std::copy(v.begin(), v.end(), out.begin());
            }
        });
        for (int k = 0; k < nx; ++k) {
            if (stats[k].failed) {
                std::ostringstream os;
                os << "same-slice Picard refinement did not settle within " << grid.max_picard
                   << " iterations at slice " << j << " (x=" << xs[k] << ")";
                throw ConvergenceError(os.str());
            }
            V.meta().clamp_residual = std::max(V.meta().clamp_residual, stats[k].residual);
            V.meta().max_picard = std::max(V.meta().max_picard, stats[k].picard);
        }
    }
    return V;
}

}  // namespace

GridSpec default_grid(const SwitchingProblem& problem, double x0, int n_steps, int n_x,
                      double t0) {
    require_1d(problem);
    const double span = std::sqrt(problem.horizon() - t0);
    double s = sigma_max(problem, t0, n_steps, x0, x0, 1);
    for (int pass = 0; pass < 8; ++pass) {
        const double half = 6.0 * s * span;
        if (!(half > 0.0)) break;
        const double s2 = sigma_max(problem, t0, n_steps, x0 - half, x0 + half, n_x);
        if (s2 <= s) break;
        s = s2;
    }
    double half = 6.0 * s * span;
    if (!(half > 0.0)) half = 1.0;  // σ ≡ 0: any neighbourhood will do
    GridSpec g;
    g.time = {t0, problem.horizon(), n_steps};
    g.space = {x0 - half, x0 + half, n_x};
    return g;
}

ParabolicStencil parabolic_stencil(const SwitchingProblem& problem, const GridSpec& grid, int j) {
    const int nx = grid.space.n;
    const double dt = grid.time.dt();
    const double dx = grid.space.dx();
    const double t = grid.time.time(j);
    ParabolicStencil st;
    st.lo.assign(nx, 0.0);
    st.mid.assign(nx, 1.0);
    st.hi.assign(nx, 0.0);
    for (int k = 0; k < nx; ++k) {
        const double x = grid.space.x(k);
        const double b = problem.drift1(t, x);
        const double var = problem.variance1(t, x);
        if (!std::isfinite(b) || !std::isfinite(var)) {
            std::ostringstream os;
            os << "non-finite drift or volatility at t=" << t << ", x=" << x;
            throw EvaluationError(os.str());
        }
        double lo = 0.0, hi = 0.0;
        if (k > 0 && k + 1 < nx) {
            const double diff = 0.5 * var * dt / (dx * dx);
            lo = diff + (b < 0.0 ? -b * dt / dx : 0.0);
            hi = diff + (b > 0.0 ? b * dt / dx : 0.0);
        } else if (k == 0 && nx > 1) {
            hi = b > 0.0 ? b * dt / dx : 0.0;
        } else if (k == nx - 1 && nx > 1) {
            lo = b < 0.0 ? -b * dt / dx : 0.0;
        }
        st.lo[k] = lo;
        st.hi[k] = hi;
        st.mid[k] = 1.0 - lo - hi;
        const double ratio = dt * (var / (dx * dx) + std::abs(b) / dx);
        if (ratio > st.worst_ratio) {
            st.worst_ratio = ratio;
            st.worst_x = x;
        }
    }
    return st;
}

void check_cfl(const ParabolicStencil& st, const GridSpec& grid, double m, double n) {
    const double total = st.worst_ratio + grid.time.dt() * (m + n);
    if (total > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "CFL violated: dt·(σ²/dx² + |b|/dx";
        if (m + n > 0.0) os << " + m + n";
        os << ") = " << total << " > 1 at x=" << st.worst_x << "; use a smaller dt";
        if (m + n > 0.0) os << " (penalty stiffness m + n = " << m + n << ")";
        throw CflError(os.str(), st.worst_x, total);
    }
}

std::vector<double> step_parabolic(std::span<const double> w, const SwitchingProblem& problem,
                                   const GridSpec& grid, int j) {
    validate_grid(problem, grid);
    const int p = problem.modes();
    const int nx = grid.space.n;
    if (w.size() != static_cast<std::size_t>(nx) * p)
        throw ConfigError("step_parabolic: slice size does not match grid");
    const ParabolicStencil st = parabolic_stencil(problem, grid, j);
    check_cfl(st, grid);
    const double dt = grid.time.dt();
    const double t = grid.time.time(j);
    std::vector<double> c(w.size());
    for (int k = 0; k < nx; ++k) {
        const double x = grid.space.x(k);
        auto node = w.subspan(static_cast<std::size_t>(k) * p, p);
        for (int i = 0; i < p; ++i) {
            double E = st.mid[k] * node[i];
            if (k > 0) E += st.lo[k] * w[(k - 1) * p + i];
            if (k + 1 < nx) E += st.hi[k] * w[(k + 1) * p + i];
            c[k * p + i] = E + dt * problem.reward1(i, t, x, node);
        }
    }
    return c;
}

ValueField solve_minmax(const SwitchingProblem& problem, const GridSpec& grid) {
    return run_scheme(problem, grid, {Mode::Clamp, ClampKind::MinMax, 0, 0, Provenance::DirectMinmax});
}

ValueField solve_maxmin(const SwitchingProblem& problem, const GridSpec& grid) {
    return run_scheme(problem, grid, {Mode::Clamp, ClampKind::MaxMin, 0, 0, Provenance::DirectMaxmin});
}

ValueField solve_penalized(const SwitchingProblem& problem, const GridSpec& grid, double m,
                           double n) {
    if (!(m >= 0.0) || !(n >= 0.0)) throw ConfigError("solve_penalized: m, n must be >= 0");
    return run_scheme(problem, grid, {Mode::Explicit, ClampKind::MinMax, m, n, Provenance::Penalized});
}

ValueField solve_reflected_penalized(const SwitchingProblem& problem, const GridSpec& grid,
                                     LadderDirection direction, double penalty) {
    if (!(penalty >= 0.0)) throw ConfigError("ladder rung penalty must be >= 0");
    if (direction == LadderDirection::Decreasing)
        return run_scheme(problem, grid, {Mode::Clamp, ClampKind::LowerOnly, penalty, 0,
                                          Provenance::LadderDecreasing});
    return run_scheme(problem, grid, {Mode::Clamp, ClampKind::UpperOnly, 0, penalty,
                                      Provenance::LadderIncreasing});
}

LadderSchedule LadderSchedule::doubling(int J) {
    LadderSchedule s;
    for (int j = 0; j <= J; ++j) s.penalties.push_back(std::ldexp(1.0, j));
    return s;
}

void LadderSchedule::validate() const {
    for (std::size_t a = 0; a < penalties.size(); ++a) {
        if (!(penalties[a] >= 0.0)) throw ConfigError("ladder penalties must be >= 0");
        if (a > 0 && !(penalties[a] > penalties[a - 1]))
            throw ConfigError("ladder penalties must be strictly increasing");
    }
    if (max_rungs < 1) throw ConfigError("ladder max_rungs must be >= 1");
}

LadderResult run_ladder(const SwitchingProblem& problem, const GridSpec& grid,
                        const LadderSchedule& schedule, LadderDirection direction) {
    if (schedule.penalties.empty()) throw ConfigError("run_ladder: empty schedule");
    schedule.validate();
    LadderResult res;
    const double sign = direction == LadderDirection::Decreasing ? 1.0 : -1.0;
    for (double pen : schedule.penalties) {
        if (static_cast<int>(res.rungs.size()) >= schedule.max_rungs) break;
        ValueField f = solve_reflected_penalized(problem, grid, direction, pen);
        if (!res.rungs.empty()) {
            const ValueField& prev = res.rungs.back();
            double worst = 0.0, gap = 0.0;
            std::size_t where = 0;
            for (std::size_t a = 0; a < f.values().size(); ++a) {
                const double d = f.values()[a] - prev.values()[a];
                gap = std::max(gap, std::abs(d));
                if (sign * d > worst) {
                    worst = sign * d;
                    where = a;
                }
            }
            if (worst > schedule.monotone_tolerance) {
                const int p = f.modes();
                const std::size_t node = where / p;
                std::ostringstream os;
                os << "ladder rung " << pen << " is not "
                   << (direction == LadderDirection::Decreasing ? "below" : "above")
                   << " rung " << prev.meta().m + prev.meta().n << " by " << worst
                   << " at t_index " << node / f.space().n << ", x=" << f.space().x(node % f.space().n)
                   << ", mode " << where % p + 1 << "; dt is likely too large for this penalty";
                throw SchemeOrderError(os.str());
            }
            res.cauchy_gaps.push_back(gap);
            res.rungs.push_back(std::move(f));
            if (gap < schedule.tolerance) break;
        } else {
            res.rungs.push_back(std::move(f));
        }
    }
    res.limit = res.rungs.back();
    return res;
}

}  // namespace swgame
