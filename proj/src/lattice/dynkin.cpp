#include "swgame/lattice/dynkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "swgame/errors.hpp"

namespace swgame {

namespace {

void validate(const TinyDynkinGame& g) {
    if (g.M < 1) throw ConfigError("dynkin: M must be >= 1");
    const std::size_t N = g.interior_nodes();
    if (g.terminal.size() != static_cast<std::size_t>(g.M + 1) || g.reward.size() != N ||
        g.lower.size() != N || g.upper.size() != N)
        throw ConfigError("dynkin: array sizes do not match M");
    if (!(g.q >= 0.0 && g.q <= 1.0)) throw ConfigError("dynkin: q must lie in [0,1]");
    for (std::size_t a = 0; a < N; ++a) {
        if (!(g.lower[a] < g.upper[a])) {
            std::ostringstream os;
            os << "dynkin: obstacles not strictly separated at node " << a << " (L=" << g.lower[a]
               << ", U=" << g.upper[a] << ")";
            throw ConfigError(os.str());
        }
    }
}

// Expected payoff for fixed rule bitmasks, by backward evaluation on the tree.
double play(const TinyDynkinGame& g, std::uint32_t sigma, std::uint32_t tau,
            std::vector<double>& w) {
    for (int k = 0; k <= g.M; ++k) w[k] = g.terminal[k];
    for (int j = g.M - 1; j >= 0; --j) {
        for (int k = 0; k <= j; ++k) {
            const std::size_t a = TinyDynkinGame::node(j, k);
            if (sigma >> a & 1u) {
                w[k] = g.lower[a];
            } else if (tau >> a & 1u) {
                w[k] = g.upper[a];
            } else {
                w[k] = g.reward[a] + g.q * w[k + 1] + (1.0 - g.q) * w[k];
            }
        }
    }
    return w[0];
}

}  // namespace

double dynkin_recursion(const TinyDynkinGame& g) {
    validate(g);
    std::vector<double> w(g.terminal);
    for (int j = g.M - 1; j >= 0; --j) {
        for (int k = 0; k <= j; ++k) {
            const std::size_t a = TinyDynkinGame::node(j, k);
            const double c = g.reward[a] + g.q * w[k + 1] + (1.0 - g.q) * w[k];
            w[k] = std::max(g.lower[a], std::min(g.upper[a], c));
        }
    }
    return w[0];
}

DynkinValues enumerate_dynkin_value(const TinyDynkinGame& g) {
    validate(g);
    const std::size_t N = g.interior_nodes();
    if (2 * N > 20) {
        std::ostringstream os;
        os << "dynkin: 2^" << 2 * N << " rule pairs exceeds the 2^20 enumeration limit";
        throw ConfigError(os.str());
    }
    const std::uint32_t rules = std::uint32_t{1} << N;
    std::vector<double> w(g.M + 1);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t tau = 0; tau < rules; ++tau) {
        double sup = -std::numeric_limits<double>::infinity();
        for (std::uint32_t sigma = 0; sigma < rules; ++sigma)
            sup = std::max(sup, play(g, sigma, tau, w));
        best = std::min(best, sup);
    }
    return {best, dynkin_recursion(g)};
}

}  // namespace swgame
