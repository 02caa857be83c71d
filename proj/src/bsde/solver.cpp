#include "swgame/bsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "swgame/errors.hpp"
#include "swgame/field_io.hpp"
#include "swgame/model/driver.hpp"
#include "swgame/parallel.hpp"

namespace swgame {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void exponents(int dims, int degree, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == dims) {
        out.push_back(cur);
        return;
    }
    for (int e = 0; e <= degree; ++e) {
        cur.push_back(e);
        exponents(dims, degree - e, cur, out);
        cur.pop_back();
    }
}

// Terms sorted by total degree so the constant comes first.
std::vector<std::vector<int>> basis_terms(int dims, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    exponents(dims, degree, cur, out);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        int sa = 0, sb = 0;
        for (int e : a) sa += e;
        for (int e : b) sb += e;
        return sa < sb;
    });
    return out;
}

void basis_row(const StepRegression& r, std::span<const double> x, double* row) {
    double z[16];
    for (std::size_t a = 0; a < r.active.size(); ++a) {
        const int q = r.active[a];
        z[a] = (x[q] - r.shift[q]) / r.scale[q];
    }
    for (std::size_t t = 0; t < r.terms.size(); ++t) {
        double v = 1.0;
        for (std::size_t a = 0; a < r.active.size(); ++a)
            for (int e = 0; e < r.terms[t][a]; ++e) v *= z[a];
        row[t] = v;
    }
}

double eval_row(const std::vector<double>& coef, const double* row, std::size_t n_terms,
                std::size_t stride, std::size_t col) {
    double s = 0.0;
    for (std::size_t t = 0; t < n_terms; ++t) s += coef[t * stride + col] * row[t];
    return s;
}

Matrix least_squares(const Matrix& A, const Matrix& B) {
    return A.colPivHouseholderQr().solve(B);
}

}  // namespace

BsdeSolution::BsdeSolution(SwitchingProblem problem, std::shared_ptr<const PathBundle> bundle,
                           double m, double n, RegressionBasis basis)
    : problem_(std::move(problem)), bundle_(std::move(bundle)), m_(m), n_(n), basis_(basis) {}

double BsdeSolution::y(std::size_t path, std::size_t step, int mode) const {
    const auto x = bundle_->state(path, step);
    if (step == bundle_->n_steps) return problem_.terminal(mode, x);
    const StepRegression& r = steps_[step];
    double row[128];
    basis_row(r, x, row);
    return eval_row(r.y_coef, row, r.terms.size(), problem_.modes(), mode);
}

double BsdeSolution::z(std::size_t path, std::size_t step, int mode, int k) const {
    const StepRegression& r = steps_[step];
    double row[128];
    basis_row(r, bundle_->state(path, step), row);
    return eval_row(r.z_coef, row, r.terms.size(),
                    static_cast<std::size_t>(problem_.modes()) * bundle_->dim_w,
                    static_cast<std::size_t>(mode) * bundle_->dim_w + k);
}

BsdePathRecord BsdeSolution::path_record(std::size_t path) const {
    const int p = problem_.modes();
    const std::size_t M = bundle_->n_steps;
    BsdePathRecord rec;
    rec.y.resize((M + 1) * p);
    rec.k_plus.assign((M + 1) * p, 0.0);
    rec.k_minus.assign((M + 1) * p, 0.0);
    for (std::size_t j = 0; j <= M; ++j)
        for (int i = 0; i < p; ++i) rec.y[j * p + i] = y(path, j, i);
    const double dt = bundle_->dt;
    for (std::size_t j = 0; j < M; ++j) {
        const double t = bundle_->time(j);
        const auto x = bundle_->state(path, j);
        for (int i = 0; i < p; ++i) {
            const double yi = rec.y[(j + 1) * p + i];
            const double yn = rec.y[(j + 1) * p + problem_.next(i)];
            const double below = std::max(-(yi - (yn - problem_.cost_down(i, t, x))), 0.0);
            const double above = std::max(yi - (yn + problem_.cost_up(i, t, x)), 0.0);
            rec.k_plus[(j + 1) * p + i] = rec.k_plus[j * p + i] + n_ * below * dt;
            rec.k_minus[(j + 1) * p + i] = rec.k_minus[j * p + i] + m_ * above * dt;
        }
    }
    return rec;
}

double BsdeSolution::y0(int mode) const {
    double s = 0.0;
    for (std::size_t a = 0; a < bundle_->n_paths; ++a) s += y(a, 0, mode);
    return s / static_cast<double>(bundle_->n_paths);
}

BsdeSolution solve_penalized_bsde(const SwitchingProblem& problem,
                                  std::shared_ptr<const PathBundle> bundle, double m, double n,
                                  RegressionBasis basis, BsdeOptions options) {
    if (!bundle) throw ConfigError("solve_penalized_bsde: no path bundle");
    const PathBundle& B = *bundle;
    if (B.dim_x != problem.dim_x() || B.dim_w != problem.dim_w())
        throw ConfigError("solve_penalized_bsde: bundle dimensions differ from the problem");
    if (std::abs(B.horizon() - problem.horizon()) > 1e-9 * (1.0 + problem.horizon()))
        throw ConfigError("solve_penalized_bsde: bundle horizon differs from the problem");
    if (!(m >= 0.0) || !(n >= 0.0)) throw ConfigError("solve_penalized_bsde: m, n must be >= 0");
    if (m * B.dt > 1.0 || n * B.dt > 1.0) {
        std::ostringstream os;
        os << "solve_penalized_bsde: penalty too stiff for the explicit scheme (m·dt=" << m * B.dt
           << ", n·dt=" << n * B.dt << ", both must be <= 1); use more time steps";
        throw ConfigError(os.str());
    }
    if (basis.degree < 0) throw ConfigError("solve_penalized_bsde: negative basis degree");
    if (B.dim_x > 16) throw ConfigError("solve_penalized_bsde: at most 16 state dimensions");

    const int p = problem.modes();
    const int d = B.dim_w;
    const int kx = B.dim_x;
    const std::size_t N = B.n_paths;
    const std::size_t M = B.n_steps;
    const double dt = B.dt;
    BsdeSolution sol(problem, bundle, m, n, basis);
    sol.steps().resize(M);

    // Ȳ at step j+1 for every path.
    std::vector<double> y_next(N * p), y_cur(N * p);
    for (std::size_t a = 0; a < N; ++a)
        for (int i = 0; i < p; ++i) y_next[a * p + i] = problem.terminal(i, B.state(a, M));

    for (std::size_t jj = M; jj-- > 0;) {
        const double t = B.time(jj);
        StepRegression& r = sol.steps()[jj];
        r.shift.assign(kx, 0.0);
        r.scale.assign(kx, 1.0);
        for (int q = 0; q < kx; ++q) {
            double mean = 0.0;
            for (std::size_t a = 0; a < N; ++a) mean += B.state(a, jj)[q];
            mean /= static_cast<double>(N);
            double var = 0.0;
            for (std::size_t a = 0; a < N; ++a) {
                const double e = B.state(a, jj)[q] - mean;
                var += e * e;
            }
            const double sd = std::sqrt(var / static_cast<double>(N));
            r.shift[q] = mean;
            if (sd > 1e-12 * (1.0 + std::abs(mean))) {
                r.scale[q] = sd;
                r.active.push_back(q);
            }
        }
        r.terms = basis_terms(static_cast<int>(r.active.size()),
                              r.active.empty() ? 0 : basis.degree);
        const std::size_t T = r.terms.size();
        if (T > 128) throw ConfigError("solve_penalized_bsde: basis has more than 128 terms");
        if (N < T) {
            std::ostringstream os;
            os << "rank-deficient regression at step " << jj << ": " << N << " paths for " << T
               << " basis terms";
            throw ConditioningError(os.str());
        }

        Matrix A(N, T), Y(N, p), Z(N, static_cast<Eigen::Index>(p) * d);
        parallel_for(N, options.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t a = b; a < e; ++a) {
                const auto x = B.state(a, jj);
                basis_row(r, x, A.row(a).data());
                const double* yn = &y_next[a * p];
                for (int i = 0; i < p; ++i) {
                    const double g_dn = problem.cost_down(i, t, x);
                    const double g_up = problem.cost_up(i, t, x);
                    const double f = problem.reward(i, t, x, std::span<const double>(yn, p)) +
                                     penalty_term(yn[i], yn[problem.next(i)], g_dn, g_up, m, n);
                    if (!std::isfinite(f)) {
                        std::ostringstream os;
                        os << "non-finite driver for mode " << i + 1 << " at path " << a
                           << ", step " << jj;
                        throw EvaluationError(os.str());
                    }
                    Y(a, i) = yn[i] + dt * f;
                    const auto dB = B.increment(a, jj);
                    for (int k = 0; k < d; ++k) Z(a, i * d + k) = yn[i] * dB[k] / dt;
                }
            }
        });

        const Eigen::ColPivHouseholderQR<Matrix> qr(A);
        if (T > 1) {
            // Singular values of R equal those of A.
            const Matrix R = qr.matrixR().topLeftCorner(T, T).triangularView<Eigen::Upper>();
            const Eigen::JacobiSVD<Matrix> svd(R);
            const auto& s = svd.singularValues();
            r.condition = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1)
                                                : std::numeric_limits<double>::infinity();
            if (!(r.condition <= basis.condition_limit)) {
                std::ostringstream os;
                os << "regression basis ill-conditioned at step " << jj << " (condition number "
                   << r.condition << " > " << basis.condition_limit << ")";
                throw ConditioningError(os.str());
            }
        }
        Matrix rhs(N, p + static_cast<Eigen::Index>(p) * d);
        rhs << Y, Z;
        const Matrix coef = qr.solve(rhs);
        r.y_coef.assign(T * p, 0.0);
        r.z_coef.assign(T * p * d, 0.0);
        for (std::size_t tt = 0; tt < T; ++tt) {
            for (int i = 0; i < p; ++i) r.y_coef[tt * p + i] = coef(tt, i);
            for (int c = 0; c < p * d; ++c) r.z_coef[tt * p * d + c] = coef(tt, p + c);
        }

        if (options.cross_validate) {
            r.cv_rmse.assign(p, 0.0);
            std::vector<Eigen::Index> idx[2];
            for (std::size_t a = 0; a < N; ++a) idx[a % 2].push_back(static_cast<Eigen::Index>(a));
            if (idx[1].size() >= T) {
                for (int fold = 0; fold < 2; ++fold) {
                    const auto& fit = idx[fold];
                    const auto& test = idx[1 - fold];
                    Matrix Af(fit.size(), T), Yf(fit.size(), p);
                    for (std::size_t a = 0; a < fit.size(); ++a) {
                        Af.row(a) = A.row(fit[a]);
                        Yf.row(a) = Y.row(fit[a]);
                    }
                    const Matrix cf = least_squares(Af, Yf);
                    for (Eigen::Index a : test) {
                        const Eigen::RowVectorXd pred = A.row(a) * cf;
                        for (int i = 0; i < p; ++i) {
                            const double e = pred(i) - Y(a, i);
                            r.cv_rmse[i] += e * e;
                        }
                    }
                }
                for (int i = 0; i < p; ++i)
                    r.cv_rmse[i] = std::sqrt(r.cv_rmse[i] / static_cast<double>(N));
            }
        }

        const Matrix fitted = A * coef.leftCols(p);
        for (std::size_t a = 0; a < N; ++a)
            for (int i = 0; i < p; ++i) y_cur[a * p + i] = fitted(a, i);
        std::swap(y_cur, y_next);
    }
    return sol;
}

std::vector<BsdeSolution> ladder_bsde(const SwitchingProblem& problem,
                                      std::shared_ptr<const PathBundle> bundle,
                                      const LadderSchedule& schedule, RegressionBasis basis,
                                      LadderDirection direction, BsdeOptions options) {
    std::vector<BsdeSolution> out;
    if (schedule.penalties.empty()) return out;
    schedule.validate();
    const double other = schedule.inner.empty() ? 0.0 : schedule.inner.front();
    options.cross_validate = true;
    const double sign = direction == LadderDirection::Decreasing ? 1.0 : -1.0;
    for (double pen : schedule.penalties) {
        if (static_cast<int>(out.size()) >= schedule.max_rungs) break;
        const double m = direction == LadderDirection::Decreasing ? pen : other;
        const double n = direction == LadderDirection::Decreasing ? other : pen;
        BsdeSolution cur = solve_penalized_bsde(problem, bundle, m, n, basis, options);
        if (!out.empty()) {
            const BsdeSolution& prev = out.back();
            const PathBundle& B = *bundle;
            const int p = problem.modes();
            for (std::size_t j = 0; j < B.n_steps; ++j) {
                for (int i = 0; i < p; ++i) {
                    double noise = 0.0;
                    if (!cur.steps()[j].cv_rmse.empty())
                        noise = std::max(noise, cur.steps()[j].cv_rmse[i]);
                    if (!prev.steps()[j].cv_rmse.empty())
                        noise = std::max(noise, prev.steps()[j].cv_rmse[i]);
                    const double thr = 3.0 * noise + 1e-10;
                    for (std::size_t a = 0; a < B.n_paths; ++a) {
                        const double diff = sign * (cur.y(a, j, i) - prev.y(a, j, i));
                        if (diff > thr) {
                            std::ostringstream os;
                            os << "BSDE ladder rung " << pen << " breaks monotonicity by " << diff
                               << " (threshold " << thr << ") at path " << a << ", step " << j
                               << ", mode " << i + 1;
                            throw SchemeOrderError(os.str());
                        }
                    }
                }
            }
        }
        out.push_back(std::move(cur));
    }
    return out;
}

FeynmanKacResidual feynman_kac_residual(const BsdeSolution& sol, const ValueField& field) {
    const PathBundle& B = sol.bundle();
    if (B.dim_x != 1) throw ConfigError("feynman_kac_residual: requires dim_x = 1");
    if (static_cast<std::size_t>(field.time().n_steps) != B.n_steps ||
        std::abs(field.time().t0 - B.t0) > 1e-12 || field.modes() != sol.problem().modes()) {
        std::ostringstream os;
        os << "grid mismatch: field has M=" << field.time().n_steps << ", t0=" << field.time().t0
           << "; bundle has n_steps=" << B.n_steps << ", t0=" << B.t0;
        throw GridMismatchError(os.str());
    }
    const int p = field.modes();
    FeynmanKacResidual res;
    double total = 0.0;
    for (std::size_t j = 0; j <= B.n_steps; ++j) {
        for (int i = 0; i < p; ++i) {
            double s = 0.0;
            for (std::size_t a = 0; a < B.n_paths; ++a)
                s += std::abs(sol.y(a, j, i) -
                              field.interpolate(static_cast<int>(j), B.state(a, j)[0], i));
            total += s;
            res.worst_step_mean = std::max(res.worst_step_mean, s / static_cast<double>(B.n_paths));
        }
    }
    res.mean_abs = total / (static_cast<double>(B.n_paths) * (B.n_steps + 1) * p);
    return res;
}

void write_bsde_csv(const std::filesystem::path& path, const BsdeSolution& sol,
                    std::size_t max_paths) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    const PathBundle& B = sol.bundle();
    const int p = sol.problem().modes();
    const std::size_t n_paths = std::min(max_paths, B.n_paths);
    out << "path,step,mode,Y,K_plus,K_minus\n";
    for (std::size_t a = 0; a < n_paths; ++a) {
        const BsdePathRecord rec = sol.path_record(a);
        for (std::size_t j = 0; j <= B.n_steps; ++j)
            for (int i = 0; i < p; ++i) {
                const std::size_t c = j * p + i;
                out << a << ',' << j << ',' << i + 1 << ',' << format_double(rec.y[c]) << ','
                    << format_double(rec.k_plus[c]) << ',' << format_double(rec.k_minus[c])
                    << '\n';
            }
    }
    nlohmann::ordered_json meta = {
        {"seed", B.seed},         {"n_paths", B.n_paths},     {"exported_paths", n_paths},
        {"n_steps", B.n_steps},   {"t0", B.t0},               {"dt", B.dt},
        {"m", sol.m()},           {"n", sol.n()},             {"basis_degree", sol.basis().degree},
    };
    std::ofstream mout(path.string() + ".meta.json", std::ios::binary);
    mout << meta.dump(2) << '\n';
}

}  // namespace swgame
