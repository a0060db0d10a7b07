#pragma once

#include "fbsde.hpp"

#include <memory>
#include <string>

namespace mfg {

// A unilateral deviation for player 1: feedback rules built on the
// equilibrium field, a constant/zero control, an open-loop path, or a
// freshly re-solved frozen-flow field ("refit").
struct DeviationStrategy {
    enum class Kind { equilibrium, scaled, zero, constant, refit, open_loop };
    Kind kind = Kind::equilibrium;
    std::string id = "equilibrium";
    double scale = 1.0;
    Vec constant;
    std::shared_ptr<const DecouplingField> refit_field;
    std::vector<Vec> open_loop;

    static DeviationStrategy equilibrium_rule();
    static DeviationStrategy scaled_rule(double s);
    static DeviationStrategy zero_rule();
    static DeviationStrategy constant_rule(const Vec& c);
    static DeviationStrategy refit_rule(std::shared_ptr<const DecouplingField> field);
    static DeviationStrategy open_loop_rule(std::vector<Vec> path);
    // "equilibrium" | "scale:0.9" | "zero" | "constant:c" | "refit"
    static DeviationStrategy parse(const std::string& text);
};

// Per-player cost estimates for the coupled equilibrium system.
struct PlayerCostTable {
    long n_players = 0;
    int replications = 0;
    std::vector<double> mean;      // per player
    std::vector<double> std_error; // per player
    double pooled_mean = 0.0;
};

// Simulates the coupled system: the drift reads the live empirical measure
// while every strategy reads the limiting flow and field. Deterministic
// given (N, seed); replication r of player i reuses the noise of particle i
// under replication_seed(seed, r).
PlayerCostTable simulate_nplayer(const MfgModel& model, const DecouplingField& field,
                                 const MeasureFlow& flow, long n_players, std::uint64_t seed,
                                 int replications = 200);

struct DeviationRow {
    std::string deviation;
    long n_players = 0;
    double improvement = 0.0; // baseline cost minus deviated cost for player 1
    double std_error = 0.0;
    double eps_n = 0.0; // measured |J^{N,1} - J| at this N
    double eps_std_error = 0.0;
    bool within_bound = false; // improvement <= eps_n + 3 stderr
};

struct GapRow {
    long n_players = 0;
    double player1_gap = 0.0; // |J^{N,1} - J| via coupled-minus-decoupled differencing
    double player1_gap_std_error = 0.0;
    double mean_gap = 0.0; // player-averaged gap
    double mean_gap_std_error = 0.0;
    double limit_cost = 0.0; // decoupled estimate at this N
    double limit_cost_std_error = 0.0;
};

struct NashGapReport {
    std::vector<GapRow> gaps;          // one per gap N (>= 4 for the slope fit)
    std::vector<DeviationRow> deviations;
    std::vector<PlayerCostTable> player_costs; // per gap N
    double limit_cost = 0.0;           // pooled decoupled estimate
    double limit_cost_std_error = 0.0;
    double fitted_gap_slope = 0.0;     // log-log slope of player-1 gap vs N
    bool all_within_bound = true;
    // A finite sweep can falsify the Nash inequality but never verify it
    // over all admissible deviations.
    static constexpr const char* kScopeNote =
        "deviation sweep is a falsification test over the configured strategies only";
};

// Deviation study: player 1 plays each deviation against the equilibrium
// strategies of the others, with common random numbers against the
// baseline run. The limiting cost is measured from decoupled independent
// copies driven by the same Brownian draws (exact coupling).
NashGapReport deviation_sweep(const MfgModel& model, const DecouplingField& field,
                              const MeasureFlow& flow, const std::vector<long>& gap_Ns,
                              const std::vector<long>& deviation_Ns,
                              const std::vector<DeviationStrategy>& deviations, int replications,
                              std::uint64_t seed);

struct ChaosRow {
    long n_players = 0;
    double coupling_error = 0.0; // max_i E[sup_t |X^i - Xbar^i|^2]
    double coupling_std_error = 0.0;
    double w2_sup = 0.0; // sup_t E[W_2^2(empirical_t, mu_t)]
    double w2_sup_std_error = 0.0;
    double cost_gap = 0.0; // |mean_i J^{N,i} - J| by CRN differencing
    double cost_gap_std_error = 0.0;
};

struct ChaosTable {
    std::vector<ChaosRow> rows;
    double coupling_slope = 0.0;
    double w2_slope = 0.0;
    double cost_gap_slope = 0.0;
};

// Coupled system vs decoupled i.i.d. copies sharing per-player Brownian
// draws (Sznitman-style exact coupling).
ChaosTable chaos_experiment(const MfgModel& model, const DecouplingField& field,
                            const MeasureFlow& flow, const std::vector<long>& n_players_list,
                            int replications, std::uint64_t seed);

} // namespace mfg
