// Command-line front end: swgame {audit|solve|simulate|compare} [options]
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "swgame/cli/commands.hpp"
#include "swgame/errors.hpp"

namespace {

std::filesystem::path default_out(const std::string& command) {
    const char* root = std::getenv("SWGAME_OUT");
    return std::filesystem::path(root && *root ? root : "swgame-out") / command;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace swgame;
    CLI::App app{"Zero-sum cyclic switching games: audits, solvers and game simulation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool force = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration (defaults apply if omitted)");
        sub->add_option("--out", out_dir, "output directory (default $SWGAME_OUT/<command>)");
        sub->add_option("--seed", seed, "override monte_carlo.seed");
        sub->add_option("--threads", threads, "worker threads; results do not depend on it")
            ->check(CLI::PositiveNumber);
    };

    auto* audit = app.add_subcommand("audit", "check the standing assumptions on the problem");
    common(audit);

    std::string route;
    auto* solve = app.add_subcommand("solve", "compute value surfaces by one route");
    common(solve);
    solve->add_option("--route", route,
                      "pde-minmax | pde-maxmin | ladder-dec | ladder-inc | lattice | bsde")
        ->required();
    solve->add_flag("--force", force, "solve even if the exact audits fail");

    std::string field_file;
    std::optional<int> start_mode;
    std::optional<int> perturbations;
    bool dump = false;
    auto* sim = app.add_subcommand("simulate", "play the synthesized saddle strategies");
    common(sim);
    sim->add_option("--field", field_file, "field CSV written by solve")->required();
    sim->add_option("--start-mode", start_mode, "one-based start mode for the saddle audit");
    sim->add_option("--perturbations", perturbations, "deviations per player");
    sim->add_flag("--dump-bundle", dump, "also write the simulated paths to paths.bin");

    std::vector<std::string> files;
    std::optional<double> tolerance;
    double window = 0.0;
    auto* cmp = app.add_subcommand("compare", "pairwise gaps between field files");
    common(cmp);
    cmp->add_option("files", files, "field CSV files")->required()->expected(2, -1);
    cmp->add_option("--tolerance", tolerance, "fail (exit 1) when a sup gap exceeds this");
    cmp->add_option("--window", window, "only compare |x - grid centre| <= window");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    CommandContext ctx;
    try {
        if (!config_path.empty()) {
            ctx.config = load_config(config_path);
        } else {
            ctx.config = parse_config("{}", "<defaults>");
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (seed) ctx.config.monte_carlo.seed = *seed;
    if (threads) ctx.config.threads = *threads;
    ctx.force = force;

    CLI::App* used = app.get_subcommands().front();
    const std::string name = used->get_name();
    ctx.out_dir = out_dir.empty() ? default_out(name) : std::filesystem::path(out_dir);

    if (name == "audit") return cmd_audit(ctx);
    if (name == "solve") return cmd_solve(ctx, route);
    if (name == "simulate") return cmd_simulate(ctx, field_file, start_mode, perturbations, dump);
    std::vector<std::filesystem::path> paths(files.begin(), files.end());
    return cmd_compare(ctx, paths, tolerance, window);
}
