#include "swgame/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "swgame/bsde/solver.hpp"
#include "swgame/errors.hpp"
#include "swgame/field_io.hpp"
#include "swgame/game/saddle.hpp"
#include "swgame/lattice/lattice.hpp"
#include "swgame/model/audit.hpp"
#include "swgame/pde/solver.hpp"
#include "swgame/sde/paths.hpp"

namespace swgame {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::ostream& out(const CommandContext& c) { return c.out ? *c.out : std::cout; }
std::ostream& err(const CommandContext& c) { return c.err ? *c.err : std::cerr; }

int guarded(const CommandContext& ctx, const std::string& where, const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err(ctx) << "error: " << where << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const GridMismatchError& e) {
        err(ctx) << "error: " << where << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err(ctx) << "error: " << where << ": " << e.what() << "\n";
        return kExitCheckFailed;
    }
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_manifest(const CommandContext& ctx, const std::string& command, const json& args,
                    bool with_config = true) {
    json m;
    m["version"] = kVersion;
    m["command"] = command;
    m["arguments"] = args;
    if (with_config) m["config"] = json::parse(ctx.config.resolved_json());
    std::ofstream f(ctx.out_dir / "manifest.json", std::ios::binary);
    f << m.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << text;
}

std::string csv_field(const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

void write_audit_csv(const fs::path& path, const AuditReport& r) {
    std::ofstream f(path, std::ios::binary);
    f << "check,verdict,heuristic,measured,witness_t,witness_x,witness_mode,detail\n";
    for (const auto& c : r.checks) {
        f << c.name << ',' << to_string(c.verdict) << ',' << (c.heuristic ? 1 : 0) << ','
          << format_double(c.measured) << ',';
        if (c.witness) {
            f << format_double(c.witness->t) << ',';
            std::string xs;
            for (std::size_t a = 0; a < c.witness->x.size(); ++a)
                xs += (a ? " " : "") + format_double(c.witness->x[a]);
            f << xs << ',' << (c.witness->mode >= 0 ? std::to_string(c.witness->mode + 1) : "")
              << ',' << csv_field(c.witness->detail);
        } else {
            f << ",,," << csv_field(c.note);
        }
        f << '\n';
    }
}

AuditReport exact_audits(const RunConfig& cfg, const SwitchingProblem& problem) {
    const GridSpec g = grid_spec(cfg, problem);
    const auto xs = g.space.points();
    AuditReport r = validate_consistency(problem, std::span<const double>(xs));
    const auto tx = tx_grid_1d(g.time.t0, g.time.horizon, cfg.audit.n_t, xs);
    r.append(check_nonfree_loop(problem, tx));
    return r;
}

std::string summary_at_x0(const ValueField& f, double x0) {
    std::ostringstream os;
    os.precision(10);
    os << "v(t0, x0=" << x0 << "):";
    for (int i = 0; i < f.modes(); ++i) os << " v" << i + 1 << "=" << f.interpolate(0, x0, i);
    return os.str();
}

}  // namespace

const std::vector<std::string>& solve_routes() {
    static const std::vector<std::string> routes = {"pde-minmax", "pde-maxmin", "ladder-dec",
                                                    "ladder-inc", "lattice",    "bsde"};
    return routes;
}

int cmd_audit(const CommandContext& ctx) {
    return guarded(ctx, "audit", [&] {
        prepare_dir(ctx.out_dir);
        write_manifest(ctx, "audit", json::object());
        const SwitchingProblem problem(ctx.config.problem);
        AuditReport r = exact_audits(ctx.config, problem);
        r.append(audit_regularity(problem, ctx.config.audit.seed, ctx.config.audit.n_samples));
        write_text(ctx.out_dir / "audit.txt", r.to_text());
        write_audit_csv(ctx.out_dir / "audit.csv", r);
        out(ctx) << r.to_text();
        return r.overall() ? kExitOk : kExitCheckFailed;
    });
}

int cmd_solve(const CommandContext& ctx, const std::string& route) {
    const auto& routes = solve_routes();
    if (std::find(routes.begin(), routes.end(), route) == routes.end()) {
        std::string list;
        for (const auto& r : routes) list += (list.empty() ? "" : ", ") + r;
        err(ctx) << "error: unknown route '" << route << "' (expected one of " << list << ")\n";
        return kExitUsage;
    }
    return guarded(ctx, route, [&] {
        const RunConfig& cfg = ctx.config;
        const SwitchingProblem problem(cfg.problem);
        if (!ctx.force) {
            const AuditReport r = exact_audits(cfg, problem);
            if (!r.overall()) {
                err(ctx) << r.to_text() << "error: " << route
                         << ": audits failed; rerun with --force to solve anyway\n";
                return kExitCheckFailed;
            }
        }
        prepare_dir(ctx.out_dir);
        write_manifest(ctx, "solve", {{"route", route}, {"force", ctx.force}});
        const GridSpec grid = grid_spec(cfg, problem);
        std::ostringstream summary;
        summary.precision(10);
        summary << "route " << route << "\n";

        if (route == "pde-minmax" || route == "pde-maxmin") {
            const ValueField f =
                route == "pde-minmax" ? solve_minmax(problem, grid) : solve_maxmin(problem, grid);
            write_field(ctx.out_dir / "field.csv", f);
            const auto bv = barrier_violation(problem, f);
            summary << summary_at_x0(f, cfg.x0) << "\n"
                    << "barrier violation lower=" << bv.lower << " upper=" << bv.upper << "\n"
                    << "clamp residual " << f.meta().clamp_residual << ", CFL ratio "
                    << f.meta().cfl_ratio << "\n";
        } else if (route == "ladder-dec" || route == "ladder-inc") {
            const auto dir = route == "ladder-dec" ? LadderDirection::Decreasing
                                                   : LadderDirection::Increasing;
            const LadderResult res = run_ladder(problem, grid, cfg.ladder, dir);
            const fs::path rung_dir = ctx.out_dir / "rungs";
            prepare_dir(rung_dir);
            std::ofstream lf(ctx.out_dir / "ladder.csv", std::ios::binary);
            lf << "rung,penalty,cauchy_gap\n";
            for (std::size_t a = 0; a < res.rungs.size(); ++a) {
                const double pen = cfg.ladder.penalties[a];
                write_field(rung_dir / ("rung_" + std::to_string(a) + ".csv"), res.rungs[a]);
                lf << a << ',' << format_double(pen) << ','
                   << (a == 0 ? std::string() : format_double(res.cauchy_gaps[a - 1])) << '\n';
            }
            write_field(ctx.out_dir / "field.csv", res.limit);
            summary << summary_at_x0(res.limit, cfg.x0) << "\n"
                    << "rungs " << res.rungs.size() << ", last Cauchy gap "
                    << (res.cauchy_gaps.empty() ? 0.0 : res.cauchy_gaps.back()) << "\n";
        } else if (route == "lattice") {
            LatticeOptions lo;
            lo.lambda = cfg.lattice.lambda;
            const int levels = cfg.lattice.n_levels > 0
                                   ? cfg.lattice.n_levels
                                   : levels_for_half_width(problem, 0.0, cfg.x0, cfg.lattice.n_steps,
                                                           cfg.lattice.half_width, lo);
            const Lattice lat = build_lattice(problem, 0.0, cfg.x0, cfg.lattice.n_steps, levels, lo);
            InductionOptions io;
            io.threads = cfg.threads;
            const LatticeValues lv = backward_induct(problem, lat, io);
            write_lattice_csv(ctx.out_dir / "lattice.csv", lv);
            write_field(ctx.out_dir / "field.csv", resample(lv.field, grid.space));
            summary << summary_at_x0(lv.field, cfg.x0) << "\n"
                    << "levels " << levels << ", dx " << lat.dx << ", steps " << lat.n_steps
                    << ", clamp residual " << lv.field.meta().clamp_residual << "\n";
        } else {
            const auto& mc = cfg.monte_carlo;
            const std::vector<double> x0{cfg.x0};
            SimulationOptions so;
            so.threads = cfg.threads;
            auto bundle = std::make_shared<const PathBundle>(
                simulate_paths(problem, 0.0, x0, mc.n_steps, mc.n_paths, mc.seed, so));
            RegressionBasis basis;
            basis.degree = mc.basis_degree;
            BsdeOptions bo;
            bo.threads = cfg.threads;
            const BsdeSolution sol = solve_penalized_bsde(problem, bundle, mc.m, mc.n, basis, bo);
            write_bsde_csv(ctx.out_dir / "bsde.csv", sol, mc.export_paths);
            summary << "Y0:";
            for (int i = 0; i < problem.modes(); ++i) summary << " Y" << i + 1 << "=" << sol.y0(i);
            summary << "\n";
            GridSpec pg = grid;
            pg.time.n_steps = mc.n_steps;
            const ValueField pen = solve_penalized(problem, pg, mc.m, mc.n);
            const auto fk = feynman_kac_residual(sol, pen);
            summary << summary_at_x0(pen, cfg.x0) << " (penalized PDE)\n"
                    << "Feynman-Kac residual mean=" << fk.mean_abs
                    << " worst step mean=" << fk.worst_step_mean << "\n";
        }
        write_text(ctx.out_dir / "summary.txt", summary.str());
        out(ctx) << summary.str();
        return kExitOk;
    });
}

int cmd_simulate(const CommandContext& ctx, const fs::path& field_file,
                 std::optional<int> start_mode_opt, std::optional<int> n_pert_opt,
                 bool dump_bundle) {
    if (field_file.empty() || !fs::exists(field_file)) {
        err(ctx) << "error: simulate: field file '" << field_file.string() << "' not found\n";
        return kExitUsage;
    }
    return guarded(ctx, "simulate", [&] {
        const RunConfig& cfg = ctx.config;
        auto problem = std::make_shared<const SwitchingProblem>(cfg.problem);
        auto field = std::make_shared<const ValueField>(read_field(field_file));
        const int start = start_mode_opt.value_or(cfg.game.start_mode);
        const int n_pert = n_pert_opt.value_or(cfg.game.n_perturbations);
        if (start < 1 || start > problem->modes())
            throw ConfigError("start mode must lie in 1.." + std::to_string(problem->modes()));
        const auto& mc = cfg.monte_carlo;
        if (field->modes() != problem->modes() || field->time().n_steps != mc.n_steps ||
            std::abs(field->time().horizon - problem->horizon()) > 1e-12 ||
            std::abs(field->time().t0) > 1e-12) {
            std::ostringstream os;
            os << "grid mismatch: field " << field_file.string() << " has p=" << field->modes()
               << ", t∈[" << field->time().t0 << ", " << field->time().horizon
               << "], M=" << field->time().n_steps << "; simulation grid has p="
               << problem->modes() << ", t∈[0, " << problem->horizon() << "], M=" << mc.n_steps;
            throw GridMismatchError(os.str());
        }
        prepare_dir(ctx.out_dir);
        write_manifest(ctx, "simulate",
                       {{"field", field_file.string()},
                        {"start_mode", start},
                        {"n_perturbations", n_pert},
                        {"dump_bundle", dump_bundle}});
        const std::vector<double> x0{cfg.x0};
        SimulationOptions so;
        so.threads = cfg.threads;
        const PathBundle bundle =
            simulate_paths(*problem, 0.0, x0, mc.n_steps, mc.n_paths, mc.seed, so);
        if (dump_bundle) {
            std::ofstream bf(ctx.out_dir / "paths.bin", std::ios::binary);
            write_bundle(bf, bundle);
        }
        CouplingOptions co;
        co.threads = cfg.threads;

        std::ostringstream summary;
        summary.precision(10);
        if (problem->reward_uses_values())
            summary << "note: rewards depend on ȳ; the game payoff evaluates them at ȳ = 0\n";
        std::ofstream table(ctx.out_dir / "payoff.csv", std::ios::binary);
        table << "start_mode,J,se,n_paths,mean_switches,field_value\n";
        for (int i = 0; i < problem->modes(); ++i) {
            const SaddlePair pair = synthesize_saddle(problem, field, i, cfg.game.eps);
            const auto ts = play_game(*problem, pair.u, pair.v, i, bundle, co);
            const PayoffEstimate est = payoff(ts);
            const double v = field->interpolate(0, cfg.x0, i);
            table << i + 1 << ',' << format_double(est.mean) << ',' << format_double(est.se) << ','
                  << est.n << ',' << format_double(est.mean_events) << ',' << format_double(v)
                  << '\n';
            summary << "J" << i + 1 << "(u*,v*) = " << est.mean << " ± " << est.se
                    << "  v" << i + 1 << "(0,x0) = " << v << "  mean switches " << est.mean_events
                    << "\n";
            if (i == start - 1) {
                std::vector<GameTranscript> head(
                    ts.begin(), ts.begin() + static_cast<std::ptrdiff_t>(
                                                 std::min(ts.size(), mc.export_paths)));
                write_transcripts(ctx.out_dir / "transcripts.jsonl", head);
            }
        }
        SaddleOptions opt;
        opt.scheme_tolerance = cfg.tolerances.scheme;
        opt.se_multiplier = cfg.tolerances.se_multiplier;
        opt.eps = cfg.game.eps;
        opt.coupling = co;
        const SaddleReport rep =
            saddle_audit(problem, field, bundle, start - 1, n_pert, cfg.game.seed, opt);
        rep.write_csv(ctx.out_dir / "saddle_audit.csv");
        write_text(ctx.out_dir / "saddle_audit.txt", rep.to_text());
        summary << rep.to_text();
        write_text(ctx.out_dir / "summary.txt", summary.str());
        out(ctx) << summary.str();
        return rep.passed() ? kExitOk : kExitCheckFailed;
    });
}

int cmd_compare(const CommandContext& ctx, const std::vector<fs::path>& files,
                std::optional<double> tolerance, double window) {
    if (files.size() < 2) {
        err(ctx) << "error: compare: need at least two field files\n";
        return kExitUsage;
    }
    for (const auto& f : files) {
        if (!fs::exists(f)) {
            err(ctx) << "error: compare: field file '" << f.string() << "' not found\n";
            return kExitUsage;
        }
    }
    return guarded(ctx, "compare", [&] {
        std::vector<ValueField> fields;
        for (const auto& f : files) fields.push_back(read_field(f));
        prepare_dir(ctx.out_dir);
        json names = json::array();
        for (const auto& f : files) names.push_back(f.string());
        json args = {{"files", names}, {"window", window}};
        if (tolerance) args["tolerance"] = *tolerance;
        write_manifest(ctx, "compare", args, false);

        std::ofstream csv(ctx.out_dir / "compare.csv", std::ios::binary);
        csv << "file_a,file_b,mode,sup,mean_abs\n";
        std::ostringstream summary;
        double worst = 0.0;
        for (std::size_t a = 0; a < fields.size(); ++a) {
            for (std::size_t b = a + 1; b < fields.size(); ++b) {
                const auto& sp = fields[a].space();
                const double centre = 0.5 * (sp.x_min + sp.x_max);
                const double hw = window > 0.0 ? window : std::numeric_limits<double>::infinity();
                const auto gaps = compare_fields(fields[a], fields[b], centre, hw);
                summary << files[a].string() << " vs " << files[b].string() << ":";
                for (std::size_t i = 0; i < gaps.size(); ++i) {
                    csv << csv_field(files[a].string()) << ',' << csv_field(files[b].string()) << ','
                        << i + 1 << ',' << format_double(gaps[i].sup) << ','
                        << format_double(gaps[i].mean_abs) << '\n';
                    summary << " mode " << i + 1 << " sup=" << gaps[i].sup
                            << " mean=" << gaps[i].mean_abs << ";";
                }
                summary << "\n";
                worst = std::max(worst, sup_gap(gaps));
            }
        }
        summary << "largest sup gap " << worst;
        const bool ok = !tolerance || worst <= *tolerance;
        if (tolerance) summary << (ok ? " <= " : " > ") << "tolerance " << *tolerance;
        summary << "\n";
        write_text(ctx.out_dir / "compare.txt", summary.str());
        out(ctx) << summary.str();
        return ok ? kExitOk : kExitCheckFailed;
    });
}

}  // namespace swgame
