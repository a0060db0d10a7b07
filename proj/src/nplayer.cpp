#include "nplayer.hpp"

#include "parallel.hpp"
#include "wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mfg {

DeviationStrategy DeviationStrategy::equilibrium_rule() { return {}; }

DeviationStrategy DeviationStrategy::scaled_rule(double s) {
    DeviationStrategy d;
    d.kind = Kind::scaled;
    d.scale = s;
    std::ostringstream id;
    id << "scale:" << s;
    d.id = id.str();
    return d;
}

DeviationStrategy DeviationStrategy::zero_rule() {
    DeviationStrategy d;
    d.kind = Kind::zero;
    d.id = "zero";
    return d;
}

DeviationStrategy DeviationStrategy::constant_rule(const Vec& c) {
    DeviationStrategy d;
    d.kind = Kind::constant;
    d.constant = c;
    std::ostringstream id;
    id << "constant:";
    for (int i = 0; i < c.size(); ++i) id << (i ? "," : "") << c[i];
    d.id = id.str();
    return d;
}

DeviationStrategy DeviationStrategy::refit_rule(std::shared_ptr<const DecouplingField> field) {
    DeviationStrategy d;
    d.kind = Kind::refit;
    d.refit_field = std::move(field);
    d.id = "refit";
    return d;
}

DeviationStrategy DeviationStrategy::open_loop_rule(std::vector<Vec> path) {
    DeviationStrategy d;
    d.kind = Kind::open_loop;
    d.open_loop = std::move(path);
    d.id = "open_loop";
    return d;
}

DeviationStrategy DeviationStrategy::parse(const std::string& text) {
    if (text == "equilibrium") return equilibrium_rule();
    if (text == "zero") return zero_rule();
    if (text == "refit") return refit_rule(nullptr); // field attached by the caller
    if (text.rfind("scale:", 0) == 0) return scaled_rule(std::stod(text.substr(6)));
    if (text.rfind("constant:", 0) == 0) {
        std::vector<double> vals;
        std::stringstream ss(text.substr(9));
        std::string item;
        while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
        Vec c(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) c[i] = vals[i];
        return constant_rule(c);
    }
    throw InvalidArgument("unknown deviation strategy: " + text);
}

namespace {

using detail::StepCoefficients;

struct RepRequest {
    bool decoupled = false;
    bool w2_per_node = false;
    const DeviationStrategy* deviation = nullptr; // applies to player 0
};

struct RepResult {
    std::vector<double> coupled_cost;   // per player
    std::vector<double> decoupled_cost; // per player
    std::vector<double> sup_sq_diff;    // per player
    std::vector<double> w2sq;           // per node
};

// One replication of the coupled system (drift reads the live empirical
// measure; strategies read the limiting flow and field), optionally paired
// with decoupled i.i.d. copies sharing each player's Brownian increments.
RepResult simulate_replication(const MfgModel& model, const DecouplingField& field,
                               const MeasureFlow& flow, long N, const rng::Stream& stream,
                               const RepRequest& req) {
    const TimeGrid& grid = flow.grid;
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const int d = model.d, k = model.k;

    RepResult res;
    res.coupled_cost.assign(N, 0.0);
    res.sup_sq_diff.assign(N, 0.0);
    if (req.decoupled) res.decoupled_cost.assign(N, 0.0);
    if (req.w2_per_node) res.w2sq.assign(grid.n_nodes(), 0.0);

    std::vector<double> coupled(static_cast<std::size_t>(N) * d);
    std::vector<double> decoupled;
    for (long p = 0; p < N; ++p)
        for (int c = 0; c < d; ++c) coupled[p * d + c] = model.x0[c];
    if (req.decoupled) decoupled = coupled;

    auto live_measure = [&](const std::vector<double>& states) -> DiscreteMeasure {
        if (model.measure_dep == MeasureDependence::full)
            return DiscreteMeasure::uniform(d, states);
        Vec mean = Vec::Zero(d);
        for (long p = 0; p < N; ++p)
            for (int c = 0; c < d; ++c) mean[c] += states[p * d + c];
        return DiscreteMeasure::dirac(mean / static_cast<double>(N));
    };

    auto record_w2 = [&](int node) {
        if (!req.w2_per_node) return;
        const DiscreteMeasure empirical = DiscreteMeasure::uniform(d, coupled);
        const double w = (d == 1) ? w2_1d(empirical, flow.at(node)) : w2_exact(empirical, flow.at(node));
        res.w2sq[node] = w * w;
    };
    record_w2(0);

    Vec x(d), y(d), alpha(k), drift(d), xi(model.m), next(d);

    auto control_for = [&](long player, int j, const StepCoefficients& coef,
                           const DiscreteMeasure& mu_flow, const Vec& state, Vec& out) {
        const DeviationStrategy* dev =
            (req.deviation && player == 0) ? req.deviation : nullptr;
        if (!dev || dev->kind == DeviationStrategy::Kind::equilibrium) {
            field.eval_into(j, state, y);
            detail::control_at(model, coef, state, mu_flow, y, out);
            return;
        }
        switch (dev->kind) {
        case DeviationStrategy::Kind::scaled:
            field.eval_into(j, state, y);
            detail::control_at(model, coef, state, mu_flow, y, out);
            out *= dev->scale;
            return;
        case DeviationStrategy::Kind::zero:
            out.setZero();
            return;
        case DeviationStrategy::Kind::constant:
            out = dev->constant;
            return;
        case DeviationStrategy::Kind::refit:
            dev->refit_field->eval_into(j, state, y);
            detail::control_at(model, coef, state, mu_flow, y, out);
            return;
        case DeviationStrategy::Kind::open_loop:
            out = dev->open_loop.at(j);
            return;
        default:
            out.setZero();
        }
    };

    for (int j = 0; j < grid.n_steps; ++j) {
        const double t = grid.node(j);
        DiscreteMeasure flow_storage;
        const DiscreteMeasure& mu_flow = detail::effective_measure(model, flow.at(j), flow_storage);
        const DiscreteMeasure mu_live = live_measure(coupled);

        const StepCoefficients coef_live = detail::step_coefficients(model, t, mu_live);
        const StepCoefficients coef_flow =
            req.decoupled ? detail::step_coefficients(model, t, mu_flow) : StepCoefficients{};

        for (long p = 0; p < N; ++p) {
            detail::draw_noise(stream, p, static_cast<std::uint32_t>(j), xi);

            for (int c = 0; c < d; ++c) x[c] = coupled[p * d + c];
            control_for(p, j, coef_live, mu_flow, x, alpha);
            res.coupled_cost[p] += model.f(t, x, mu_live, alpha) * dt;
            drift = coef_live.b0;
            drift.noalias() += coef_live.b1 * x;
            drift.noalias() += coef_live.b2 * alpha;
            next = x + dt * drift;
            next.noalias() += sqrt_dt * (model.sigma * xi);
            for (int c = 0; c < d; ++c) coupled[p * d + c] = next[c];

            if (req.decoupled) {
                for (int c = 0; c < d; ++c) x[c] = decoupled[p * d + c];
                field.eval_into(j, x, y);
                detail::control_at(model, coef_flow, x, mu_flow, y, alpha);
                res.decoupled_cost[p] += model.f(t, x, mu_flow, alpha) * dt;
                drift = coef_flow.b0;
                drift.noalias() += coef_flow.b1 * x;
                drift.noalias() += coef_flow.b2 * alpha;
                next = x + dt * drift;
                next.noalias() += sqrt_dt * (model.sigma * xi);
                for (int c = 0; c < d; ++c) decoupled[p * d + c] = next[c];

                double diff = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double e = coupled[p * d + c] - decoupled[p * d + c];
                    diff += e * e;
                }
                res.sup_sq_diff[p] = std::max(res.sup_sq_diff[p], diff);
            }
        }
        record_w2(j + 1);
    }

    // Terminal costs against the final live empirical / limiting measures.
    {
        DiscreteMeasure flow_storage;
        const DiscreteMeasure& mu_flow =
            detail::effective_measure(model, flow.at(grid.n_steps), flow_storage);
        const DiscreteMeasure mu_live = live_measure(coupled);
        for (long p = 0; p < N; ++p) {
            for (int c = 0; c < d; ++c) x[c] = coupled[p * d + c];
            res.coupled_cost[p] += model.g(x, mu_live);
            if (req.decoupled) {
                for (int c = 0; c < d; ++c) x[c] = decoupled[p * d + c];
                res.decoupled_cost[p] += model.g(x, mu_flow);
            }
        }
    }
    return res;
}

double fit_loglog_slope(const std::vector<long>& ns, const std::vector<double>& values) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!(values[i] > 0.0)) continue;
        const double x = std::log(static_cast<double>(ns[i]));
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) return 0.0;
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
};

MeanStderr summarize(const std::vector<double>& xs) {
    const int n = static_cast<int>(xs.size());
    MeanStderr m;
    if (n == 0) return m;
    for (double v : xs) m.mean += v;
    m.mean /= n;
    if (n > 1) {
        double ss = 0.0;
        for (double v : xs) ss += (v - m.mean) * (v - m.mean);
        m.std_error = std::sqrt(ss / (n - 1) / n);
    }
    return m;
}

} // namespace

PlayerCostTable simulate_nplayer(const MfgModel& model, const DecouplingField& field,
                                 const MeasureFlow& flow, long n_players, std::uint64_t seed,
                                 int replications) {
    if (n_players < 1) throw InvalidArgument("need at least one player");
    if (replications < 1) throw InvalidArgument("need at least one replication");

    PlayerCostTable table;
    table.n_players = n_players;
    table.replications = replications;
    std::vector<std::vector<double>> per_player(n_players,
                                                std::vector<double>(replications, 0.0));

    const RepRequest req; // coupled only
    parallel_chunks(replications, 1, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t rep = begin; rep < end; ++rep) {
            const rng::Stream stream(replication_seed(seed, rep), "paths");
            const RepResult r = simulate_replication(model, field, flow, n_players, stream, req);
            for (long p = 0; p < n_players; ++p) per_player[p][rep] = r.coupled_cost[p];
        }
    });
    table.mean.resize(n_players);
    table.std_error.resize(n_players);
    double pooled = 0.0;
    for (long p = 0; p < n_players; ++p) {
        const MeanStderr m = summarize(per_player[p]);
        table.mean[p] = m.mean;
        table.std_error[p] = m.std_error;
        pooled += m.mean;
    }
    table.pooled_mean = pooled / n_players;
    return table;
}

NashGapReport deviation_sweep(const MfgModel& model, const DecouplingField& field,
                              const MeasureFlow& flow, const std::vector<long>& gap_Ns,
                              const std::vector<long>& deviation_Ns,
                              const std::vector<DeviationStrategy>& deviations, int replications,
                              std::uint64_t seed) {
    if (deviations.empty()) throw InvalidArgument("deviation list must not be empty");
    if (replications < 2) throw InvalidArgument("need at least two replications");
    std::vector<long> all_ns;
    all_ns.insert(all_ns.end(), gap_Ns.begin(), gap_Ns.end());
    all_ns.insert(all_ns.end(), deviation_Ns.begin(), deviation_Ns.end());
    std::sort(all_ns.begin(), all_ns.end());
    all_ns.erase(std::unique(all_ns.begin(), all_ns.end()), all_ns.end());
    for (long n : all_ns)
        if (n < 2) throw InvalidArgument("coupled runs need N >= 2");

    NashGapReport report;
    std::vector<double> gap_values;

    for (long N : all_ns) {
        const bool want_gap = std::find(gap_Ns.begin(), gap_Ns.end(), N) != gap_Ns.end();
        const bool want_dev =
            std::find(deviation_Ns.begin(), deviation_Ns.end(), N) != deviation_Ns.end();

        std::vector<double> p1_diff(replications), mean_diff(replications),
            limit_rep(replications);
        std::vector<std::vector<double>> per_player(N, std::vector<double>(replications, 0.0));
        std::vector<std::vector<double>> dev_improvement(
            deviations.size(), std::vector<double>(replications, 0.0));

        // Replications are independent; one counter-based stream each, so the
        // shard layout cannot change the numbers.
        parallel_chunks(replications, 1, [&](std::size_t, std::size_t begin, std::size_t end) {
            RepRequest base_req;
            base_req.decoupled = true;
            for (std::size_t rep = begin; rep < end; ++rep) {
                const rng::Stream stream(replication_seed(seed, rep), "paths");
                const RepResult base =
                    simulate_replication(model, field, flow, N, stream, base_req);

                const double coupled_mean =
                    std::accumulate(base.coupled_cost.begin(), base.coupled_cost.end(), 0.0) / N;
                const double dec_mean =
                    std::accumulate(base.decoupled_cost.begin(), base.decoupled_cost.end(), 0.0) /
                    N;
                p1_diff[rep] = base.coupled_cost[0] - base.decoupled_cost[0];
                mean_diff[rep] = coupled_mean - dec_mean;
                limit_rep[rep] = dec_mean;
                for (long p = 0; p < N; ++p) per_player[p][rep] = base.coupled_cost[p];

                if (want_dev) {
                    for (std::size_t di = 0; di < deviations.size(); ++di) {
                        RepRequest dev_req;
                        dev_req.deviation = &deviations[di];
                        const RepResult dev =
                            simulate_replication(model, field, flow, N, stream, dev_req);
                        dev_improvement[di][rep] = base.coupled_cost[0] - dev.coupled_cost[0];
                    }
                }
            }
        });

        const MeanStderr p1 = summarize(p1_diff);
        const MeanStderr mg = summarize(mean_diff);
        const MeanStderr lim = summarize(limit_rep);

        if (want_gap) {
            GapRow row;
            row.n_players = N;
            row.player1_gap = std::abs(p1.mean);
            row.player1_gap_std_error = p1.std_error;
            row.mean_gap = std::abs(mg.mean);
            row.mean_gap_std_error = mg.std_error;
            row.limit_cost = lim.mean;
            row.limit_cost_std_error = lim.std_error;
            report.gaps.push_back(row);
            gap_values.push_back(row.player1_gap);

            PlayerCostTable table;
            table.n_players = N;
            table.replications = replications;
            table.mean.resize(N);
            table.std_error.resize(N);
            double pooled = 0.0;
            for (long p = 0; p < N; ++p) {
                const MeanStderr m = summarize(per_player[p]);
                table.mean[p] = m.mean;
                table.std_error[p] = m.std_error;
                pooled += m.mean;
            }
            table.pooled_mean = pooled / N;
            report.player_costs.push_back(std::move(table));
        }

        if (want_dev) {
            for (std::size_t di = 0; di < deviations.size(); ++di) {
                const MeanStderr imp = summarize(dev_improvement[di]);
                DeviationRow row;
                row.deviation = deviations[di].id;
                row.n_players = N;
                row.improvement = imp.mean;
                row.std_error = imp.std_error;
                row.eps_n = std::abs(p1.mean);
                row.eps_std_error = p1.std_error;
                row.within_bound = imp.mean <= row.eps_n + 3.0 * imp.std_error;
                report.all_within_bound = report.all_within_bound && row.within_bound;
                report.deviations.push_back(row);
            }
        }
    }

    // Decoupled copies are nested across N (shared player streams), so the
    // largest-N estimate carries all the information.
    if (!report.gaps.empty()) {
        const GapRow& widest = report.gaps.back();
        report.limit_cost = widest.limit_cost;
        report.limit_cost_std_error = widest.limit_cost_std_error;
        report.fitted_gap_slope = fit_loglog_slope(gap_Ns, gap_values);
    }
    return report;
}

ChaosTable chaos_experiment(const MfgModel& model, const DecouplingField& field,
                            const MeasureFlow& flow, const std::vector<long>& n_players_list,
                            int replications, std::uint64_t seed) {
    if (replications < 2) throw InvalidArgument("need at least two replications");
    for (std::size_t i = 0; i < n_players_list.size(); ++i) {
        if (n_players_list[i] < 2) throw InvalidArgument("chaos experiment needs N >= 2");
        if (i > 0 && n_players_list[i] <= n_players_list[i - 1])
            throw InvalidArgument("player counts must be increasing");
    }

    ChaosTable table;
    std::vector<double> coupling_col, w2_col, gap_col;

    for (long N : n_players_list) {
        std::vector<std::vector<double>> sup_diff(N, std::vector<double>(replications, 0.0));
        std::vector<std::vector<double>> w2sq_per_node(flow.grid.n_nodes(),
                                                       std::vector<double>(replications, 0.0));
        std::vector<double> cost_diff(replications);

        parallel_chunks(replications, 1, [&](std::size_t, std::size_t begin, std::size_t end) {
            RepRequest req;
            req.decoupled = true;
            req.w2_per_node = true;
            for (std::size_t rep = begin; rep < end; ++rep) {
                const rng::Stream stream(replication_seed(seed, rep), "paths");
                const RepResult r = simulate_replication(model, field, flow, N, stream, req);
                for (long p = 0; p < N; ++p) sup_diff[p][rep] = r.sup_sq_diff[p];
                for (std::size_t j = 0; j < r.w2sq.size(); ++j) w2sq_per_node[j][rep] = r.w2sq[j];
                const double coupled_mean =
                    std::accumulate(r.coupled_cost.begin(), r.coupled_cost.end(), 0.0) / N;
                const double dec_mean =
                    std::accumulate(r.decoupled_cost.begin(), r.decoupled_cost.end(), 0.0) / N;
                cost_diff[rep] = coupled_mean - dec_mean;
            }
        });

        ChaosRow row;
        row.n_players = N;
        for (long p = 0; p < N; ++p) {
            const MeanStderr m = summarize(sup_diff[p]);
            if (m.mean >= row.coupling_error) {
                row.coupling_error = m.mean;
                row.coupling_std_error = m.std_error;
            }
        }
        for (auto& node_vals : w2sq_per_node) {
            const MeanStderr m = summarize(node_vals);
            if (m.mean >= row.w2_sup) {
                row.w2_sup = m.mean;
                row.w2_sup_std_error = m.std_error;
            }
        }
        const MeanStderr gap = summarize(cost_diff);
        row.cost_gap = std::abs(gap.mean);
        row.cost_gap_std_error = gap.std_error;
        table.rows.push_back(row);

        coupling_col.push_back(row.coupling_error);
        w2_col.push_back(row.w2_sup);
        gap_col.push_back(row.cost_gap);
    }

    table.coupling_slope = fit_loglog_slope(n_players_list, coupling_col);
    table.w2_slope = fit_loglog_slope(n_players_list, w2_col);
    table.cost_gap_slope = fit_loglog_slope(n_players_list, gap_col);
    return table;
}

} // namespace mfg
