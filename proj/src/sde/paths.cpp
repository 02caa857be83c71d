#include "swgame/sde/paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "swgame/errors.hpp"
#include "swgame/parallel.hpp"
#include "swgame/rng.hpp"

namespace swgame {

namespace {

std::string format_state(std::span<const double> x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw ConfigError("path bundle dump is truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

PathBundle simulate_paths(const SwitchingProblem& problem, double t0, std::span<const double> x0,
                          std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                          SimulationOptions options) {
    if (n_steps < 1) throw ConfigError("simulate_paths: n_steps must be at least 1");
    if (n_paths < 1) throw ConfigError("simulate_paths: n_paths must be at least 1");
    if (!(t0 < problem.horizon())) throw ConfigError("simulate_paths: t0 must precede the horizon");
    if (static_cast<int>(x0.size()) != problem.dim_x())
        throw ConfigError("simulate_paths: x0 has the wrong dimension");

    PathBundle b;
    b.t0 = t0;
    b.x0.assign(x0.begin(), x0.end());
    b.n_steps = n_steps;
    b.dt = (problem.horizon() - t0) / static_cast<double>(n_steps);
    b.n_paths = n_paths;
    b.seed = seed;
    b.dim_x = problem.dim_x();
    b.dim_w = problem.dim_w();
    const std::size_t dx = b.dim_x;
    const std::size_t dw = b.dim_w;
    b.increments.assign(n_paths * n_steps * dw, 0.0);
    b.states.assign(n_paths * (n_steps + 1) * dx, 0.0);

    const CounterRng rng(seed, 0);
    const double sqrt_dt = std::sqrt(b.dt);

    parallel_for(n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> drift(dx), vol(dx * dw);
        for (std::size_t path = begin; path < end; ++path) {
            double* xs = b.states.data() + path * (n_steps + 1) * dx;
            double* dB = b.increments.data() + path * n_steps * dw;
            std::copy(x0.begin(), x0.end(), xs);
            const std::size_t n_draws = n_steps * dw;
            for (std::size_t q = 0; q < n_draws; q += 2) {
                const auto [z0, z1] = rng.normals(path, q / 2);
                dB[q] = sqrt_dt * z0;
                if (q + 1 < n_draws) dB[q + 1] = sqrt_dt * z1;
            }
            for (std::size_t j = 0; j < n_steps; ++j) {
                const double t = b.time(j);
                std::span<const double> x(xs + j * dx, dx);
                problem.drift(t, x, drift);
                problem.vol(t, x, vol);
                for (std::size_t q = 0; q < dx; ++q) {
                    bool ok = std::isfinite(drift[q]);
                    for (std::size_t k = 0; k < dw; ++k) ok = ok && std::isfinite(vol[q * dw + k]);
                    if (!ok) {
                        std::ostringstream os;
                        os << "non-finite drift/vol on path " << path << " at step " << j
                           << ", state " << format_state(x);
                        throw EvaluationError(os.str());
                    }
                }
                const double* inc = dB + j * dw;
                double* next = xs + (j + 1) * dx;
                for (std::size_t q = 0; q < dx; ++q) {
                    double acc = xs[j * dx + q] + drift[q] * b.dt;
                    for (std::size_t k = 0; k < dw; ++k) acc += vol[q * dw + k] * inc[k];
                    next[q] = acc;
                }
            }
        }
    });

    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : b.increments) {
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(b.increments.size());
    b.increment_mean = sum / n;
    b.increment_variance = n > 1 ? (sum_sq - sum * sum / n) / (n - 1.0) : 0.0;
    return b;
}

double moment_check(const PathBundle& bundle, int gamma) {
    if (gamma < 1) throw ConfigError("moment_check: gamma must be at least 1");
    double acc = 0.0;
    for (std::size_t path = 0; path < bundle.n_paths; ++path) {
        double sup = 0.0;
        for (std::size_t j = 0; j <= bundle.n_steps; ++j) {
            double norm2 = 0.0;
            for (double v : bundle.state(path, j)) norm2 += v * v;
            sup = std::max(sup, std::sqrt(norm2));
        }
        acc += std::pow(sup, gamma);
    }
    return acc / static_cast<double>(bundle.n_paths);
}

void write_bundle(std::ostream& out, const PathBundle& b) {
    out.write("SWPB", 4);
    put_le<std::uint32_t>(out, 1);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.dim_x));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.dim_w));
    put_le<std::uint64_t>(out, b.n_paths);
    put_le<std::uint64_t>(out, b.n_steps);
    put_le<std::uint64_t>(out, b.seed);
    put_le<double>(out, b.t0);
    put_le<double>(out, b.dt);
    for (double v : b.x0) put_le<double>(out, v);
    for (double v : b.states) put_le<double>(out, v);
}

PathBundle read_bundle(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SWPB", 4) != 0)
        throw ConfigError("not a path bundle dump (bad magic)");
    if (get_le<std::uint32_t>(in) != 1) throw ConfigError("unsupported path bundle version");
    PathBundle b;
    b.dim_x = static_cast<int>(get_le<std::uint32_t>(in));
    b.dim_w = static_cast<int>(get_le<std::uint32_t>(in));
    b.n_paths = get_le<std::uint64_t>(in);
    b.n_steps = get_le<std::uint64_t>(in);
    b.seed = get_le<std::uint64_t>(in);
    b.t0 = get_le<double>(in);
    b.dt = get_le<double>(in);
    b.x0.resize(b.dim_x);
    for (auto& v : b.x0) v = get_le<double>(in);
    b.states.resize(b.n_paths * (b.n_steps + 1) * b.dim_x);
    for (auto& v : b.states) v = get_le<double>(in);
    return b;
}

}  // namespace swgame
