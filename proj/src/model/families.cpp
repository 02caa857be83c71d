#include "swgame/model/families.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace swgame::families {

namespace {

double polyval(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double coupling(const std::vector<double>& weights, double floor, std::span<const double> y) {
    double acc = 0.0;
    const std::size_t n = std::min(weights.size(), y.size());
    for (std::size_t l = 0; l < n; ++l)
        if (weights[l] != 0.0) acc += weights[l] * std::max(y[l], floor);
    return acc;
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

}  // namespace

Tagged<CoefficientFn> affine_drift(double a, double c) {
    std::ostringstream tag;
    tag << "affine(" << a << "+" << c << "x)";
    return {[a, c](double, std::span<const double> x, std::span<double> out) {
                out[0] = a + c * x[0];
            },
            tag.str()};
}

Tagged<CoefficientFn> affine_vol(double a, double c) {
    std::ostringstream tag;
    tag << "affine(" << a << "+" << c << "x)";
    return {[a, c](double, std::span<const double> x, std::span<double> out) {
                out[0] = a + c * x[0];
            },
            tag.str()};
}

Tagged<CoefficientFn> constant_vol(double sigma) {
    std::ostringstream tag;
    tag << "constant(" << sigma << ")";
    return {[sigma](double, std::span<const double>, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
                out[0] = sigma;
            },
            tag.str()};
}

Tagged<RewardFn> polynomial_reward(std::vector<double> coeffs, std::vector<double> y_weights,
                                   double y_floor) {
    std::string tag = "poly[" + join(coeffs) + "]";
    if (!y_weights.empty()) tag += "+y[" + join(y_weights) + "]";
    return {[coeffs = std::move(coeffs), w = std::move(y_weights), y_floor](
                double, std::span<const double> x, std::span<const double> y) {
                return polyval(coeffs, x[0]) + coupling(w, y_floor, y);
            },
            tag};
}

Tagged<RewardFn> cosine_reward(double amplitude, double frequency, double phase,
                               std::vector<double> y_weights, double y_floor) {
    std::ostringstream tag;
    tag << amplitude << "cos(" << frequency << "x+" << phase << ")";
    if (!y_weights.empty()) tag << "+y[" << join(y_weights) << "]";
    return {[amplitude, frequency, phase, w = std::move(y_weights), y_floor](
                double, std::span<const double> x, std::span<const double> y) {
                return amplitude * std::cos(frequency * x[0] + phase) + coupling(w, y_floor, y);
            },
            tag.str()};
}

Tagged<TerminalFn> polynomial_terminal(std::vector<double> coeffs) {
    std::string tag = "poly[" + join(coeffs) + "]";
    return {[coeffs = std::move(coeffs)](std::span<const double> x) {
                return polyval(coeffs, x[0]);
            },
            tag};
}

Tagged<CostFn> constant_cost(double value) {
    std::ostringstream tag;
    tag << "constant(" << value << ")";
    return {[value](double, std::span<const double>) { return value; }, tag.str()};
}

Tagged<CostFn> affine_cost(double a, double ct, double cx) {
    std::ostringstream tag;
    tag << "affine(" << a << "+" << ct << "t+" << cx << "x)";
    return {[a, ct, cx](double t, std::span<const double> x) { return a + ct * t + cx * x[0]; },
            tag.str()};
}

}  // namespace swgame::families
