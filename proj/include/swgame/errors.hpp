#pragma once

#include <stdexcept>
#include <string>

namespace swgame {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A user-supplied function returned a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

// Explicit-scheme stability condition violated.
class CflError : public Error {
public:
    CflError(const std::string& what, double worst_x, double ratio)
        : Error(what), worst_x_(worst_x), ratio_(ratio) {}
    [[nodiscard]] double worst_x() const { return worst_x_; }
    [[nodiscard]] double ratio() const { return ratio_; }

private:
    double worst_x_;
    double ratio_;
};

// Clamp sweep or Picard loop did not settle.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Trinomial probabilities left [0,1].
class InfeasibleLatticeError : public Error {
public:
    using Error::Error;
};

// A ladder rung broke the expected ordering; usually dt too large for the penalty.
class SchemeOrderError : public Error {
public:
    using Error::Error;
};

// Two grids that must match do not.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

// A realized play exceeded the switch budget.
class NonAdmissibleError : public Error {
public:
    using Error::Error;
};

// Regression design matrix too ill-conditioned to trust.
class ConditioningError : public Error {
public:
    using Error::Error;
};

// Bad configuration or precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace swgame
