#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "swgame/model/problem.hpp"
#include "swgame/pde/solver.hpp"
#include "swgame/sde/paths.hpp"
#include "swgame/value_field.hpp"

namespace swgame {

// Polynomial basis of total degree ≤ degree in the per-step standardized state.
struct RegressionBasis {
    int degree = 4;
    double condition_limit = 1e10;
};

struct BsdeOptions {
    bool cross_validate = false;  // 2-fold (even/odd path) out-of-fold RMSE per step
    unsigned threads = 1;
};

// Regression of one backward step. Coordinates with no spread are dropped from
// the basis; with none left the fit is the sample mean.
struct StepRegression {
    std::vector<double> shift, scale;    // per state coordinate
    std::vector<int> active;             // coordinates kept in the basis
    std::vector<std::vector<int>> terms; // exponent per active coordinate
    std::vector<double> y_coef;          // [term][mode]
    std::vector<double> z_coef;          // [term][mode·d + k]
    std::vector<double> cv_rmse;         // per mode, empty unless cross-validated
    double condition = 1.0;
};

struct BsdePathRecord {
    std::vector<double> y;        // [(step)·p + mode], steps 0..n_steps
    std::vector<double> k_plus;   // Σ n·(·)^−·dt, same layout
    std::vector<double> k_minus;  // Σ m·(·)^+·dt
};

class BsdeSolution {
public:
    BsdeSolution(SwitchingProblem problem, std::shared_ptr<const PathBundle> bundle, double m,
                 double n, RegressionBasis basis);

    [[nodiscard]] const PathBundle& bundle() const { return *bundle_; }
    [[nodiscard]] const SwitchingProblem& problem() const { return problem_; }
    [[nodiscard]] double m() const { return m_; }
    [[nodiscard]] double n() const { return n_; }
    [[nodiscard]] const RegressionBasis& basis() const { return basis_; }
    [[nodiscard]] const std::vector<StepRegression>& steps() const { return steps_; }
    [[nodiscard]] std::vector<StepRegression>& steps() { return steps_; }

    // Y^i at (path, step): the step regression evaluated at X, h^i(X_T) at the last step.
    [[nodiscard]] double y(std::size_t path, std::size_t step, int mode) const;
    // Z^i_k at (path, step < n_steps).
    [[nodiscard]] double z(std::size_t path, std::size_t step, int mode, int k) const;
    // Path-wise Y with the K surrogates accumulated forward in time.
    [[nodiscard]] BsdePathRecord path_record(std::size_t path) const;
    // Mean of Y^i over paths at step 0.
    [[nodiscard]] double y0(int mode) const;

private:
    SwitchingProblem problem_;
    std::shared_ptr<const PathBundle> bundle_;
    double m_;
    double n_;
    RegressionBasis basis_;
    std::vector<StepRegression> steps_;
};

// Backward regression of Y_{j+1} + dt·f^{i,m,n}(t_j, X_j, Ȳ_{j+1}) on the
// basis at X_j. Refuses m·dt > 1 or n·dt > 1. Throws ConditioningError naming
// the step when the design matrix condition number exceeds the limit.
BsdeSolution solve_penalized_bsde(const SwitchingProblem& problem,
                                  std::shared_ptr<const PathBundle> bundle, double m, double n,
                                  RegressionBasis basis = {}, BsdeOptions options = {});

// Rungs over schedule.penalties; the opposite penalty is schedule.inner[0]
// (0 if empty). Asserts monotone Y across rungs at every (path, step, mode)
// up to 3·cross-validated RMSE and throws SchemeOrderError otherwise.
std::vector<BsdeSolution> ladder_bsde(const SwitchingProblem& problem,
                                      std::shared_ptr<const PathBundle> bundle,
                                      const LadderSchedule& schedule, RegressionBasis basis = {},
                                      LadderDirection direction = LadderDirection::Decreasing,
                                      BsdeOptions options = {});

struct FeynmanKacResidual {
    double mean_abs = 0.0;        // over paths, steps and modes
    double worst_step_mean = 0.0; // max over (step, mode) of the path mean
};

// |Y^i_{t_j} − v^i(t_j, X_{t_j})| with v linearly interpolated in x.
FeynmanKacResidual feynman_kac_residual(const BsdeSolution& solution, const ValueField& field);

// CSV path,step,mode,Y,K_plus,K_minus for the first max_paths paths (mode
// one-based) and `path` + ".meta.json" with seed, m, n and the basis.
void write_bsde_csv(const std::filesystem::path& path, const BsdeSolution& solution,
                    std::size_t max_paths);

}  // namespace swgame
