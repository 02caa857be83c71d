#include "swgame/lattice/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "swgame/errors.hpp"
#include "swgame/field_io.hpp"
#include "swgame/parallel.hpp"

namespace swgame {

namespace {

void require_1d(const SwitchingProblem& problem, const char* who) {
    if (problem.dim_x() != 1) throw ConfigError(std::string(who) + ": requires dim_x = 1");
}

double max_sigma(const SwitchingProblem& problem, double t0, int n_steps,
                 const std::vector<double>& xs) {
    const double dt = (problem.horizon() - t0) / n_steps;
    double s2 = 0.0;
    for (int j = 0; j < n_steps; ++j)
        for (double x : xs) s2 = std::max(s2, problem.variance1(t0 + j * dt, x));
    return std::sqrt(s2);
}

std::vector<double> levels(double center, double dx, int n) {
    std::vector<double> xs(n);
    for (int k = 0; k < n; ++k) xs[k] = center + (k - (n - 1) / 2.0) * dx;
    return xs;
}

// σ_max depends on the grid, which depends on dx; a few fixed-point passes
// settle it (one pass for state-independent σ).
double choose_dx(const SwitchingProblem& problem, double t0, double x_center, int n_steps,
                 int n_levels, const LatticeOptions& opt) {
    if (opt.dx > 0.0) return opt.dx;
    const double dt = (problem.horizon() - t0) / n_steps;
    double smax = max_sigma(problem, t0, n_steps, {x_center});
    for (int pass = 0; pass < 8; ++pass) {
        const double dx = opt.lambda * (smax > 0.0 ? smax : 1.0) * std::sqrt(dt);
        const double s = max_sigma(problem, t0, n_steps, levels(x_center, dx, n_levels));
        if (s <= smax) return dx;
        smax = s;
    }
    return opt.lambda * smax * std::sqrt(dt);
}

}  // namespace

Lattice build_lattice(const SwitchingProblem& problem, double t0, double x_center, int n_steps,
                      int n_levels, LatticeOptions opt) {
    require_1d(problem, "build_lattice");
    if (n_steps < 1) throw ConfigError("build_lattice: n_steps must be >= 1");
    if (n_levels < 1 || n_levels % 2 == 0)
        throw ConfigError("build_lattice: n_levels must be odd so x_center is a node");
    if (!(t0 < problem.horizon())) throw ConfigError("build_lattice: t0 must be < T");
    if (!(opt.lambda >= 1.0)) throw ConfigError("build_lattice: lambda must be >= 1");

    Lattice lat;
    lat.t0 = t0;
    lat.horizon = problem.horizon();
    lat.n_steps = n_steps;
    lat.dt = (problem.horizon() - t0) / n_steps;
    lat.dx = choose_dx(problem, t0, x_center, n_steps, n_levels, opt);
    lat.x_center = x_center;
    lat.n_levels = n_levels;
    lat.x = levels(x_center, lat.dx, n_levels);
    const std::size_t cells = static_cast<std::size_t>(n_steps) * n_levels;
    lat.p_up.resize(cells);
    lat.p_mid.resize(cells);
    lat.p_down.resize(cells);
    for (int j = 0; j < n_steps; ++j) {
        const double t = t0 + j * lat.dt;
        for (int k = 0; k < n_levels; ++k) {
            const double x = lat.x[k];
            const double bdt = problem.drift1(t, x) * lat.dt;
            const double var = problem.variance1(t, x);
            const double m1 = bdt / lat.dx;
            const double m2 = (var * lat.dt + bdt * bdt) / (lat.dx * lat.dx);
            const double pu = 0.5 * (m2 + m1);
            const double pd = 0.5 * (m2 - m1);
            const double pm = 1.0 - pu - pd;
            if (!std::isfinite(m2) || pu < 0.0 || pd < 0.0 || pm < 0.0 || pu > 1.0 || pd > 1.0) {
                std::ostringstream os;
                os << "infeasible trinomial probabilities at step " << j << ", node " << k
                   << " (x=" << x << "): p_up=" << pu << " p_mid=" << pm << " p_down=" << pd;
                throw InfeasibleLatticeError(os.str());
            }
            lat.p_up[lat.at(j, k)] = pu;
            lat.p_mid[lat.at(j, k)] = pm;
            lat.p_down[lat.at(j, k)] = pd;
        }
    }
    return lat;
}

int levels_for_half_width(const SwitchingProblem& problem, double t0, double x_center,
                          int n_steps, double half_width, LatticeOptions opt) {
    if (opt.dx <= 0.0) {
        // dx from σ near the centre; refined once on the resulting grid.
        int n = 3;
        for (int pass = 0; pass < 4; ++pass) {
            const double dx = choose_dx(problem, t0, x_center, n_steps, n, opt);
            const int want = 2 * static_cast<int>(std::ceil(half_width / dx - 1e-9)) + 1;
            if (want == n) break;
            n = want;
        }
        return n;
    }
    return 2 * static_cast<int>(std::ceil(half_width / opt.dx - 1e-9)) + 1;
}

LatticeValues backward_induct(const SwitchingProblem& problem, const Lattice& lat,
                              InductionOptions opt) {
    require_1d(problem, "backward_induct");
    const int p = problem.modes();
    const int n = lat.n_levels;
    const int M = lat.n_steps;
    LatticeValues out;
    FieldMeta meta;
    meta.provenance = Provenance::Lattice;
    out.field = ValueField(lat.time_grid(), lat.space_grid(), p, meta);
    out.tags.assign(out.field.values().size(), Regime::Interior);
    ValueField& V = out.field;

    for (int k = 0; k < n; ++k)
        for (int i = 0; i < p; ++i) V.at(M, k, i) = problem.terminal1(i, lat.x[k]);

    auto tag_node = [&](int j, int k, double t) {
        const double x = lat.x[k];
        for (int i = 0; i < p; ++i) {
            out.tags[(static_cast<std::size_t>(j) * n + k) * p + i] =
                regime_of(V.at(j, k, i), V.at(j, k, problem.next(i)),
                          problem.cost_down1(i, t, x), problem.cost_up1(i, t, x));
        }
    };
    for (int k = 0; k < n; ++k) tag_node(M, k, lat.horizon);

    struct NodeStats {
        double residual = 0.0;
        int picard = 0;
        int sweeps = 0;
        bool failed = false;
    };
    std::vector<NodeStats> stats(n);

    for (int j = M - 1; j >= 0; --j) {
        const double t = lat.t0 + j * lat.dt;
        parallel_for(static_cast<std::size_t>(n), opt.threads, [&](std::size_t b, std::size_t e) {
            std::vector<double> E(p), c(p), v(p), prev(p), gd(p), gu(p);
            for (std::size_t kk = b; kk < e; ++kk) {
                const int k = static_cast<int>(kk);
                const double x = lat.x[k];
                const int up = k + 1 < n ? k + 1 : n - 2;
                const int dn = k > 0 ? k - 1 : 1;
                const std::size_t cell = lat.at(j, k);
                for (int i = 0; i < p; ++i) {
                    const double vu = V.at(j + 1, n == 1 ? k : up, i);
                    const double vd = V.at(j + 1, n == 1 ? k : dn, i);
                    E[i] = lat.p_up[cell] * vu + lat.p_mid[cell] * V.at(j + 1, k, i) +
                           lat.p_down[cell] * vd;
                    gd[i] = problem.cost_down1(i, t, x);
                    gu[i] = problem.cost_up1(i, t, x);
                }
                auto next_slice = V.node(j + 1, k);
                for (int i = 0; i < p; ++i) {
                    const double f = problem.reward1(i, t, x, next_slice);
                    if (!std::isfinite(f)) {
                        std::ostringstream os;
                        os << "running reward f" << i + 1 << " is not finite at t=" << t
                           << ", x=" << x;
                        throw EvaluationError(os.str());
                    }
                    c[i] = E[i] + lat.dt * f;
                }
                NodeStats& st = stats[k];
                st = {};
                auto r = clamp_modes(c, gd, gu, v, opt.kind);
                st.sweeps = r.sweeps;
                st.residual = r.residual;
                if (problem.reward_uses_values()) {
                    bool settled = false;
                    for (int it = 0; it < opt.max_picard; ++it) {
                        prev = v;
                        for (int i = 0; i < p; ++i)
                            c[i] = E[i] + lat.dt * problem.reward1(i, t, x, prev);
                        r = clamp_modes(c, gd, gu, v, opt.kind);
                        st.sweeps = std::max(st.sweeps, r.sweeps);
                        st.residual = r.residual;
                        ++st.picard;
                        double d = 0.0;
                        for (int i = 0; i < p; ++i) d = std::max(d, std::abs(v[i] - prev[i]));
                        if (d < opt.tol_picard) {
                            settled = true;
                            break;
                        }
                    }
                    st.failed = !settled;
                }
                std::copy(v.begin(), v.end(), V.node(j, k).begin());
            }
        });
        for (int k = 0; k < n; ++k) {
            if (stats[k].failed) {
                std::ostringstream os;
                os << "backward_induct: same-slice Picard refinement did not settle within "
                   << opt.max_picard << " iterations at slice " << j << " (node " << k << ")";
                throw ConvergenceError(os.str());
            }
            V.meta().clamp_residual = std::max(V.meta().clamp_residual, stats[k].residual);
            V.meta().max_picard = std::max(V.meta().max_picard, stats[k].picard);
            out.max_clamp_sweeps = std::max(out.max_clamp_sweeps, stats[k].sweeps);
            tag_node(j, k, t);
        }
    }
    return out;
}

void write_lattice_csv(const std::filesystem::path& path, const LatticeValues& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    const ValueField& f = values.field;
    out << "t_index,x_index,mode,value,regime_tag\n";
    for (int j = 0; j <= f.time().n_steps; ++j)
        for (int k = 0; k < f.space().n; ++k)
            for (int i = 0; i < f.modes(); ++i)
                out << j << ',' << k << ',' << i + 1 << ',' << format_double(f.at(j, k, i)) << ','
                    << to_string(values.tag(j, k, i)) << '\n';
}

}  // namespace swgame
