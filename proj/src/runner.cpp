#include "runner.hpp"

#include "config.hpp"
#include "io.hpp"
#include "lq_oracle.hpp"
#include "nplayer.hpp"
#include "parallel.hpp"
#include "version.hpp"
#include "wasserstein.hpp"

#include <chrono>
#include <iostream>
#include <set>
#include <sstream>

namespace mfg {

namespace {

namespace fs = std::filesystem;
using io::fmt;

void ensure_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw InvalidArgument(where + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw InvalidArgument("unknown key \"" + it.key() + "\" in " + where);
}

std::vector<long> parse_long_list(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw InvalidArgument(where + " must be a non-empty array");
    std::vector<long> out;
    for (const auto& v : j) out.push_back(v.get<long>());
    return out;
}

TimeGrid grid_from(const RunConfig& config, const MfgModel& model) {
    if (!config.n_steps) throw InvalidArgument("config needs a grid block with n_steps");
    return TimeGrid(model.T, *config.n_steps);
}

struct ArtifactWriter {
    fs::path dir;
    std::vector<std::string> names;

    void csv(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) {
        std::string text = io::join_csv_row(header);
        for (const auto& r : rows) text += io::join_csv_row(r);
        io::write_text_file(dir / name, text);
        names.push_back(name);
    }
    void json(const std::string& name, const Json& doc) {
        io::write_text_file(dir / name, doc.dump(2) + "\n");
        names.push_back(name);
    }
    void text(const std::string& name, const std::string& content) {
        io::write_text_file(dir / name, content);
        names.push_back(name);
    }
};

Json field_to_json(const DecouplingField& field) {
    Json j;
    j["format"] = "decoupling_field";
    j["layout"] =
        "values[time_node] is row-major over lattice nodes (axis 0 outer, axis 1 inner), "
        "value_dim components per node";
    j["T"] = field.grid.horizon;
    j["n_steps"] = field.grid.n_steps;
    j["dim"] = field.lattice.dim;
    j["lower"] = std::vector<double>(field.lattice.lower.data(),
                                     field.lattice.lower.data() + field.lattice.dim);
    j["spacing"] = field.lattice.spacing;
    j["counts"] = std::vector<int>{field.lattice.counts[0], field.lattice.counts[1]};
    j["value_dim"] = field.value_dim;
    j["out_of_bounds_warnings"] = field.out_of_bounds_warnings;
    j["values"] = field.values;
    return j;
}

void write_flow_csv(ArtifactWriter& w, const std::string& name, const MeasureFlow& flow) {
    const int d = flow.measures.front().dim();
    std::vector<std::string> header{"t"};
    if (d == 1) {
        header.push_back("atom");
    } else {
        for (int c = 0; c < d; ++c) header.push_back("atom_" + std::to_string(c));
    }
    header.push_back("weight");
    std::vector<std::vector<std::string>> rows;
    for (int j = 0; j < flow.grid.n_nodes(); ++j) {
        const auto& mu = flow.at(j);
        for (int i = 0; i < mu.size(); ++i) {
            std::vector<std::string> row{fmt(flow.grid.node(j))};
            for (int c = 0; c < d; ++c) row.push_back(fmt(mu.point(i)[c]));
            row.push_back(fmt(mu.weight(i)));
            rows.push_back(std::move(row));
        }
    }
    w.csv(name, header, rows);
}

Json assumption_report_json(const AssumptionReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks) {
        Json item;
        item["name"] = c.name;
        item["passed"] = c.passed;
        item["solver_blocking"] = c.solver_blocking;
        item["detail"] = c.detail;
        checks.push_back(item);
    }
    Json j;
    j["checks"] = checks;
    j["all_passed"] = report.all_passed();
    j["solver_blocked"] = report.solver_blocked();
    return j;
}

// --- command pipelines ----------------------------------------------------

int cmd_validate(const RunConfig& config, ArtifactWriter& w, std::ostringstream& summary) {
    AssumptionReport report;
    if (config.lq_spec) {
        report = check_lq_assumptions(*config.lq_spec);
    } else {
        const MfgModel model = build_model_from_config(config);
        report = validate_model(model, 200, config.seed);
    }
    w.json("report.json", assumption_report_json(report));
    summary << "assumption report (advisory; only convexity failures block the solver)\n\n"
            << report.summary();
    return 0;
}

int cmd_lq_oracle(const RunConfig& config, ArtifactWriter& w, std::ostringstream& summary) {
    if (!config.lq_spec) throw InvalidArgument("lq-oracle needs an lq_spec block");
    const LqSpec& spec = *config.lq_spec;
    if (!config.n_steps) throw InvalidArgument("config needs a grid block with n_steps");
    const TimeGrid grid(spec.T, *config.n_steps);
    const RiccatiSolution sol = solve_lq_riccati(spec, grid);

    const int d = spec.d;
    std::vector<std::string> header{"t"};
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            header.push_back(d == 1 ? "eta" : "eta_" + std::to_string(r) + std::to_string(c));
    for (int c = 0; c < d; ++c) header.push_back(d == 1 ? "chi" : "chi_" + std::to_string(c));
    for (int c = 0; c < d; ++c) header.push_back(d == 1 ? "xbar" : "xbar_" + std::to_string(c));
    std::vector<std::vector<std::string>> rows;
    for (int j = 0; j <= grid.n_steps; ++j) {
        std::vector<std::string> row{fmt(grid.node(j))};
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) row.push_back(fmt(sol.eta[j](r, c)));
        for (int c = 0; c < d; ++c) row.push_back(fmt(sol.chi[j][c]));
        for (int c = 0; c < d; ++c) row.push_back(fmt(sol.xbar[j][c]));
        rows.push_back(std::move(row));
    }
    w.csv("riccati.csv", header, rows);
    summary << "LQ oracle solved on " << grid.n_steps << " steps\n";
    summary << "eta_0 = " << fmt(sol.eta.front()(0, 0)) << "\n";
    summary << "xbar_T = " << fmt(sol.xbar.back()[0]) << "\n";
    summary << "J = " << fmt(sol.cost) << "\n";
    return 0;
}

struct SolveArtifacts {
    MfgSolution solution;
    MfgModel model;
};

SolveArtifacts run_solve(const RunConfig& config, ArtifactWriter& w, std::ostringstream& summary) {
    SolveArtifacts out{.solution = {}, .model = build_model_from_config(config)};
    const TimeGrid grid = grid_from(config, out.model);
    out.solution = solve_mfg(out.model, grid, config.fixedpoint);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < out.solution.residual_history.size(); ++k)
        rows.push_back({std::to_string(k), fmt(out.solution.residual_history[k])});
    w.csv("residuals.csv", {"iteration", "residual"}, rows);
    write_flow_csv(w, "flow.csv", out.solution.flow);
    {
        const EnsembleSummary& e = out.solution.ensemble;
        std::vector<std::string> header{"t"};
        auto col = [&](const char* base, int c, int dims) {
            return dims == 1 ? std::string(base) : std::string(base) + "_" + std::to_string(c);
        };
        for (int c = 0; c < e.d; ++c) header.push_back(col("state_mean", c, e.d));
        for (int c = 0; c < e.d; ++c) header.push_back(col("state_sd", c, e.d));
        for (int c = 0; c < e.k; ++c) header.push_back(col("control_mean", c, e.k));
        for (int c = 0; c < e.d; ++c) header.push_back(col("adjoint_mean", c, e.d));
        std::vector<std::vector<std::string>> erows;
        for (int j = 0; j < e.grid.n_nodes(); ++j) {
            std::vector<std::string> row{fmt(e.grid.node(j))};
            for (int c = 0; c < e.d; ++c) row.push_back(fmt(e.state_mean[j * e.d + c]));
            for (int c = 0; c < e.d; ++c) row.push_back(fmt(e.state_sd[j * e.d + c]));
            for (int c = 0; c < e.k; ++c)
                row.push_back(j < e.grid.n_steps ? fmt(e.control_mean[j * e.k + c]) : "");
            for (int c = 0; c < e.d; ++c) row.push_back(fmt(e.adjoint_mean[j * e.d + c]));
            erows.push_back(std::move(row));
        }
        w.csv("ensemble.csv", header, erows);
    }
    w.json("field.json", field_to_json(out.solution.field));

    const RegularityReport reg = check_value_function(out.solution.field);
    Json sj;
    sj["converged"] = out.solution.converged;
    sj["iterations"] = out.solution.residual_history.size();
    sj["final_residual"] = out.solution.residual_history.empty()
                               ? 0.0
                               : out.solution.residual_history.back();
    sj["cost"] = out.solution.cost.value;
    sj["cost_std_error"] = out.solution.cost.std_error;
    sj["field_lipschitz"] = reg.lipschitz;
    sj["field_growth"] = reg.growth;
    if (out.solution.uniqueness_gap) {
        sj["uniqueness_gap"] = *out.solution.uniqueness_gap;
        sj["possible_non_uniqueness"] =
            *out.solution.uniqueness_gap > 3.0 * config.fixedpoint.tolerance;
    }
    w.json("solution.json", sj);

    summary << (out.solution.converged ? "converged" : "NOT converged") << " after "
            << out.solution.residual_history.size() << " iterations\n";
    if (!out.solution.residual_history.empty())
        summary << "final residual = " << fmt(out.solution.residual_history.back()) << "\n";
    summary << "cost J = " << fmt(out.solution.cost.value) << " +- "
            << fmt(out.solution.cost.std_error) << "\n";
    summary << "field Lipschitz = " << fmt(reg.lipschitz) << ", growth = " << fmt(reg.growth)
            << "\n";
    if (out.solution.uniqueness_gap)
        summary << "second-initialization gap = " << fmt(*out.solution.uniqueness_gap) << "\n";
    return out;
}

int cmd_solve(const RunConfig& config, ArtifactWriter& w, std::ostringstream& summary) {
    const SolveArtifacts art = run_solve(config, w, summary);
    return art.solution.converged ? 0 : 3;
}

int cmd_nash_gap(const RunConfig& config, ArtifactWriter& w, std::ostringstream& summary) {
    if (!config.experiment.is_null())
        ensure_keys(config.experiment, {"gap_Ns", "deviation_Ns", "deviations", "replications"},
                    "experiment");
    const SolveArtifacts art = run_solve(config, w, summary);
    if (!art.solution.converged) {
        summary << "aborting deviation sweep: fixed point did not converge\n";
        return 3;
    }

    std::vector<long> gap_ns{16, 32, 64, 128, 256};
    std::vector<long> dev_ns{16, 64, 256};
    std::vector<std::string> dev_ids{"equilibrium", "scale:0.9", "scale:1.1", "zero"};
    int replications = 200;
    if (config.experiment.contains("gap_Ns"))
        gap_ns = parse_long_list(config.experiment.at("gap_Ns"), "experiment.gap_Ns");
    if (config.experiment.contains("deviation_Ns"))
        dev_ns = parse_long_list(config.experiment.at("deviation_Ns"), "experiment.deviation_Ns");
    if (config.experiment.contains("deviations")) {
        dev_ids.clear();
        for (const auto& s : config.experiment.at("deviations")) dev_ids.push_back(s.get<std::string>());
    }
    if (config.experiment.contains("replications"))
        replications = config.experiment.at("replications").get<int>();

    std::vector<DeviationStrategy> deviations;
    for (const auto& id : dev_ids) {
        DeviationStrategy dev = DeviationStrategy::parse(id);
        if (dev.kind == DeviationStrategy::Kind::refit)
            dev.refit_field = std::make_shared<DecouplingField>(
                solve_frozen_fbsde(art.model, art.solution.flow, config.fixedpoint.lattice));
        deviations.push_back(std::move(dev));
    }

    const NashGapReport report =
        deviation_sweep(art.model, art.solution.field, art.solution.flow, gap_ns, dev_ns,
                        deviations, replications, config.seed);

    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& g : report.gaps)
            rows.push_back({std::to_string(g.n_players), fmt(g.player1_gap),
                            fmt(g.player1_gap_std_error), fmt(g.mean_gap),
                            fmt(g.mean_gap_std_error), fmt(g.limit_cost),
                            fmt(g.limit_cost_std_error)});
        w.csv("nash_gaps.csv",
              {"N", "player1_gap", "player1_gap_stderr", "mean_gap", "mean_gap_stderr",
               "limit_cost", "limit_cost_stderr"},
              rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& d : report.deviations)
            rows.push_back({d.deviation, std::to_string(d.n_players), fmt(d.improvement),
                            fmt(d.std_error), fmt(d.eps_n), fmt(d.eps_std_error),
                            d.within_bound ? "1" : "0"});
        w.csv("deviations.csv",
              {"deviation", "N", "improvement", "improvement_stderr", "eps_N", "eps_N_stderr",
               "within_bound"},
              rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& t : report.player_costs)
            for (long p = 0; p < t.n_players; ++p)
                rows.push_back({std::to_string(t.n_players), std::to_string(p), fmt(t.mean[p]),
                                fmt(t.std_error[p])});
        w.csv("player_costs.csv", {"N", "player", "cost_mean", "cost_stderr"}, rows);
    }
    Json sj;
    sj["limit_cost"] = report.limit_cost;
    sj["limit_cost_std_error"] = report.limit_cost_std_error;
    sj["fitted_gap_slope"] = report.fitted_gap_slope;
    sj["all_deviations_within_bound"] = report.all_within_bound;
    bool eps_decreasing = true;
    {
        // Monotonicity of the player-1 gap over the deviation Ns.
        std::vector<double> eps;
        for (long n : dev_ns)
            for (const auto& g : report.gaps)
                if (g.n_players == n) eps.push_back(g.player1_gap);
        for (std::size_t i = 1; i < eps.size(); ++i)
            eps_decreasing = eps_decreasing && eps[i] < eps[i - 1];
        sj["eps_N_decreasing"] = eps_decreasing;
    }
    sj["scope"] = NashGapReport::kScopeNote;
    w.json("nash_summary.json", sj);

    summary << "\nnash gap sweep: limit cost " << fmt(report.limit_cost) << ", slope "
            << fmt(report.fitted_gap_slope) << "\n";
    summary << "all deviations within eps_N + 3 stderr: "
            << (report.all_within_bound ? "yes" : "NO") << "\n";
    summary << NashGapReport::kScopeNote << "\n";
    return 0;
}

int cmd_chaos(const RunConfig& config, ArtifactWriter& w, std::ostringstream& summary) {
    if (!config.experiment.is_null())
        ensure_keys(config.experiment, {"Ns", "replications"}, "experiment");
    const SolveArtifacts art = run_solve(config, w, summary);
    if (!art.solution.converged) {
        summary << "aborting chaos experiment: fixed point did not converge\n";
        return 3;
    }
    std::vector<long> ns{8, 16, 32, 64, 128, 256, 512};
    int replications = 200;
    if (config.experiment.contains("Ns"))
        ns = parse_long_list(config.experiment.at("Ns"), "experiment.Ns");
    if (config.experiment.contains("replications"))
        replications = config.experiment.at("replications").get<int>();

    const ChaosTable table = chaos_experiment(art.model, art.solution.field, art.solution.flow, ns,
                                              replications, config.seed);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table.rows)
        rows.push_back({std::to_string(r.n_players), fmt(r.coupling_error),
                        fmt(r.coupling_std_error), fmt(r.w2_sup), fmt(r.w2_sup_std_error),
                        fmt(r.cost_gap), fmt(r.cost_gap_std_error)});
    w.csv("chaos.csv",
          {"N", "coupling_error", "coupling_stderr", "w2_sup", "w2_sup_stderr", "cost_gap",
           "cost_gap_stderr"},
          rows);
    Json sj;
    sj["coupling_slope"] = table.coupling_slope;
    sj["w2_slope"] = table.w2_slope;
    sj["cost_gap_slope"] = table.cost_gap_slope;
    w.json("chaos_summary.json", sj);
    summary << "\nchaos: coupling slope " << fmt(table.coupling_slope) << ", w2 slope "
            << fmt(table.w2_slope) << ", cost gap slope " << fmt(table.cost_gap_slope) << "\n";
    return 0;
}

int cmd_wasserstein_rate(const RunConfig& config, ArtifactWriter& w,
                         std::ostringstream& summary) {
    if (!config.experiment.is_null())
        ensure_keys(config.experiment, {"sampler", "Ns", "reps", "reference_atoms"}, "experiment");
    std::string sampler = "gaussian";
    std::vector<long> ns{16, 64, 256, 1024, 4096};
    int reps = 100, reference_atoms = 100000;
    if (config.experiment.contains("sampler"))
        sampler = config.experiment.at("sampler").get<std::string>();
    if (config.experiment.contains("Ns"))
        ns = parse_long_list(config.experiment.at("Ns"), "experiment.Ns");
    if (config.experiment.contains("reps")) reps = config.experiment.at("reps").get<int>();
    if (config.experiment.contains("reference_atoms"))
        reference_atoms = config.experiment.at("reference_atoms").get<int>();

    const RateTable table =
        empirical_rate_experiment(LawSampler::by_name(sampler), ns, reps, config.seed,
                                  reference_atoms);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < table.sample_sizes.size(); ++i)
        rows.push_back({std::to_string(table.sample_sizes[i]), fmt(table.mean_w2sq[i]),
                        fmt(table.stderr_w2sq[i]), fmt(table.bound[i])});
    w.csv("rate.csv", {"N", "mean_w2sq", "stderr", "bound_C_Npow"}, rows);
    summary << "empirical rate for sampler '" << sampler << "': fitted slope "
            << fmt(table.fitted_slope) << "\n";
    summary << "reference discretization check W2 = " << fmt(table.reference_check_w2) << "\n";
    bool below = true;
    for (std::size_t i = 0; i < table.mean_w2sq.size(); ++i)
        below = below && table.mean_w2sq[i] <= table.bound[i] * (1.0 + 1e-12);
    summary << "all estimates below calibrated C N^{-2/5} bound: " << (below ? "yes" : "NO")
            << "\n";
    return 0;
}

} // namespace

RunOutcome run_command(const std::string& command, const std::string& config_text,
                       const std::string& out_dir, std::optional<std::uint64_t> seed_override,
                       bool quiet) {
    RunOutcome outcome;
    const auto t_start = std::chrono::steady_clock::now();

    RunConfig config;
    try {
        config = parse_config(config_text);
        if (seed_override) {
            config.seed = *seed_override;
            config.fixedpoint.seed = *seed_override;
        }
    } catch (const std::exception& e) {
        outcome.exit_code = 2;
        outcome.message = std::string("config validation failed: ") + e.what();
        if (!quiet) std::cerr << outcome.message << "\n";
        return outcome;
    }

    const std::set<std::string> known = {"solve",        "lq-oracle", "nash-gap",
                                         "chaos",        "validate",  "wasserstein-rate"};
    if (!known.count(command)) {
        outcome.exit_code = 2;
        outcome.message = "unknown command: " + command;
        if (!quiet) std::cerr << outcome.message << "\n";
        return outcome;
    }

    ArtifactWriter writer;
    writer.dir = io::create_run_dir(out_dir);
    outcome.run_dir = writer.dir.string();

    const std::string canonical = canonical_config(config);
    writer.text("config.json", canonical);

    std::ostringstream summary;
    int code = 0;
    try {
        if (command == "validate") code = cmd_validate(config, writer, summary);
        else if (command == "lq-oracle") code = cmd_lq_oracle(config, writer, summary);
        else if (command == "solve") code = cmd_solve(config, writer, summary);
        else if (command == "nash-gap") code = cmd_nash_gap(config, writer, summary);
        else if (command == "chaos") code = cmd_chaos(config, writer, summary);
        else if (command == "wasserstein-rate") code = cmd_wasserstein_rate(config, writer, summary);
    } catch (const InvalidArgument& e) {
        code = 2;
        summary << "validation error: " << e.what() << "\n";
    } catch (const AssumptionViolation& e) {
        code = 2;
        summary << "assumption violation: " << e.what() << "\n";
    } catch (const std::exception& e) {
        code = 3;
        summary << "solver error: " << e.what() << "\n";
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    writer.text("summary.txt", summary.str());
    Json manifest;
    manifest["tool"] = "mfg";
    manifest["tool_version"] = kVersion;
    manifest["command"] = command;
    manifest["config_hash"] = io::hex64(io::fnv1a(canonical));
    manifest["master_seed"] = config.seed;
    manifest["threads"] = thread_count();
    manifest["wall_clock_seconds"] = wall;
    manifest["exit_code"] = code;
    manifest["outputs"] = writer.names;
    io::write_text_file(writer.dir / "manifest.json", manifest.dump(2) + "\n");

    outcome.exit_code = code;
    outcome.message = summary.str();
    if (!quiet) {
        std::cout << outcome.message;
        std::cout << "run directory: " << outcome.run_dir << "\n";
    }
    return outcome;
}

} // namespace mfg
