#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swgame/cli/config.hpp"

namespace swgame {

inline constexpr const char* kVersion = "swgame 0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

struct CommandContext {
    RunConfig config;
    std::filesystem::path out_dir;
    bool force = false;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

// Each command creates out_dir, writes manifest.json (version, command,
// arguments, resolved config) and returns an exit code. Errors are reported
// on ctx.err; the caller does not need to catch.
int cmd_audit(const CommandContext& ctx);
int cmd_solve(const CommandContext& ctx, const std::string& route);
int cmd_simulate(const CommandContext& ctx, const std::filesystem::path& field_file,
                 std::optional<int> start_mode, std::optional<int> n_perturbations,
                 bool dump_bundle = false);
// Pairwise gaps between fields; exit 1 when a sup gap exceeds `tolerance`.
// window > 0 restricts to |x − centre of grid| ≤ window.
int cmd_compare(const CommandContext& ctx, const std::vector<std::filesystem::path>& files,
                std::optional<double> tolerance, double window = 0.0);

const std::vector<std::string>& solve_routes();

}  // namespace swgame
