#include "swgame/lattice/clamp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "swgame/errors.hpp"

namespace swgame {

const char* to_string(Regime r) {
    switch (r) {
        case Regime::LowerContact: return "lower-contact";
        case Regime::Interior: return "interior";
        case Regime::UpperContact: return "upper-contact";
    }
    return "?";
}

namespace {

double apply(ClampKind kind, double c, double lo, double hi) {
    switch (kind) {
        case ClampKind::MinMax: return std::max(lo, std::min(hi, c));
        case ClampKind::MaxMin: return std::min(hi, std::max(lo, c));
        case ClampKind::LowerOnly: return std::max(lo, c);
        case ClampKind::UpperOnly: return std::min(hi, c);
    }
    return c;
}

// min over sign assignments φ_l ∈ {−g̲_l, +ḡ_l} of |Σ φ_l|.
double cycle_margin(std::span<const double> g_down, std::span<const double> g_up) {
    const std::size_t p = g_down.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
        double sum = 0.0;
        for (std::size_t l = 0; l < p; ++l) sum += (mask >> l & 1u) ? g_up[l] : -g_down[l];
        best = std::min(best, std::abs(sum));
    }
    return best;
}

}  // namespace

ClampResult clamp_modes(std::span<const double> c, std::span<const double> g_down,
                        std::span<const double> g_up, std::span<double> v, ClampKind kind,
                        int max_sweeps) {
    const std::size_t p = c.size();
    if (g_down.size() != p || g_up.size() != p || v.size() != p)
        throw ConfigError("clamp_modes: size mismatch");

    double gap = 0.0;
    if (kind == ClampKind::MinMax || kind == ClampKind::MaxMin) {
        gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p; ++i) gap = std::min(gap, g_down[i] + g_up[i]);
    } else {
        const auto& g = kind == ClampKind::LowerOnly ? g_down : g_up;
        for (std::size_t i = 0; i < p; ++i) gap += g[i];
    }
    if (!(gap > 0.0)) {
        std::ostringstream os;
        os << "clamp_modes: cost gap " << gap << " is not positive";
        throw ConfigError(os.str());
    }

    double cmax = 1.0;
    double lo = c[0], hi = c[0];
    for (double ci : c) {
        cmax = std::max(cmax, std::abs(ci));
        lo = std::min(lo, ci);
        hi = std::max(hi, ci);
    }
    if (max_sweeps <= 0) {
        // The sweep ratchets by the smallest nonzero cycle sum, which can be far
        // below the per-mode gap.
        double rate = gap;
        if (p <= 12 && (kind == ClampKind::MinMax || kind == ClampKind::MaxMin)) {
            const double margin = cycle_margin(g_down, g_up);
            if (margin > 0.0) rate = std::min(rate, margin);
        }
        const double est = 10.0 * static_cast<double>(p) * (1.0 + (hi - lo) / rate);
        max_sweeps = static_cast<int>(std::min(est, 1e8));
    }
    const double tol = 1e-12 * cmax;

    std::copy(c.begin(), c.end(), v.begin());
    ClampResult res;
    // Once below tolerance a few extra sweeps usually land on the exact fixed
    // point, which keeps contact tags stable under exact comparison.
    int settle = -1;
    while (true) {
        if (res.sweeps >= max_sweeps) {
            std::ostringstream os;
            os << "clamp_modes: no convergence after " << res.sweeps
               << " sweeps; costs may nearly violate the non-free-loop property (gap " << gap
               << ")";
            throw ConvergenceError(os.str());
        }
        double change = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double w = v[(i + 1) % p];
            const double nv = apply(kind, c[i], w - g_down[i], w + g_up[i]);
            change = std::max(change, std::abs(nv - v[i]));
            v[i] = nv;
        }
        ++res.sweeps;
        if (change == 0.0) break;
        if (settle < 0 && change < tol) settle = 2 * static_cast<int>(p);
        if (settle >= 0 && settle-- == 0) break;
    }
    for (std::size_t i = 0; i < p; ++i)
        res.residual =
            std::max(res.residual, std::abs(clamp_residual(v, c, g_down, g_up, static_cast<int>(i), kind)));
    return res;
}

std::vector<double> clamp_modes(std::span<const double> c, std::span<const double> g_down,
                                std::span<const double> g_up, ClampKind kind) {
    std::vector<double> v(c.size());
    clamp_modes(c, g_down, g_up, v, kind);
    return v;
}

double clamp_residual(std::span<const double> v, std::span<const double> c,
                      std::span<const double> g_down, std::span<const double> g_up, int mode,
                      ClampKind kind) {
    const std::size_t p = v.size();
    const double w = v[(mode + 1) % p];
    const double dl = v[mode] - (w - g_down[mode]);
    const double du = v[mode] - (w + g_up[mode]);
    const double dc = v[mode] - c[mode];
    switch (kind) {
        case ClampKind::MinMax: return std::min(dl, std::max(du, dc));
        case ClampKind::MaxMin: return std::max(du, std::min(dl, dc));
        case ClampKind::LowerOnly: return std::min(dl, dc);
        case ClampKind::UpperOnly: return std::max(du, dc);
    }
    return 0.0;
}

Regime regime_of(double v, double v_next, double g_down, double g_up) {
    if (v <= v_next - g_down) return Regime::LowerContact;
    if (v >= v_next + g_up) return Regime::UpperContact;
    return Regime::Interior;
}

}  // namespace swgame
