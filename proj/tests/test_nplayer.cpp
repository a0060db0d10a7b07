#include <doctest.h>

#include "fixedpoint.hpp"
#include "lq_oracle.hpp"
#include "nplayer.hpp"
#include "parallel.hpp"

#include <cmath>

using namespace mfg;

namespace {

LqSpec mean_free_spec() { return LqSpec::scalar(1, 0, 1, 0, 1, 0, 0, 1, 1, 1, 1); }
// Drift-coupled variant: b0 = 0.5 puts the empirical mean into the dynamics.
LqSpec coupled_spec() { return LqSpec::scalar(1, 0.5, 1, 0.5, 1, 0.5, 0, 1, 1, 1, 1); }

struct Setup {
    MfgModel model;
    TimeGrid grid{1.0, 25};
    DecouplingField field;
    MeasureFlow flow;
};

Setup make_setup(const LqSpec& spec, int n_steps = 25) {
    Setup s{build_lq_model(spec), TimeGrid(spec.T, n_steps), {}, {}};
    const RiccatiSolution oracle = solve_lq_riccati(spec, s.grid);
    s.flow = oracle.equilibrium_flow(256);
    LatticeConfig cfg;
    cfg.spacing = 0.05;
    s.field = solve_frozen_fbsde(s.model, s.flow, cfg);
    return s;
}

} // namespace

TEST_CASE("measure-independent games decouple exactly") {
    const Setup s = make_setup(mean_free_spec());
    const ChaosTable table = chaos_experiment(s.model, s.field, s.flow, {2, 8}, 3, 5);
    for (const auto& row : table.rows) {
        CHECK(row.coupling_error == 0.0); // bitwise: coupled == decoupled
        CHECK(row.cost_gap == 0.0);
    }
}

TEST_CASE("player paths equal single-agent paths under the replication seed") {
    const Setup s = make_setup(mean_free_spec());
    const std::uint64_t seed = 64;

    // Single replication (index 0) of the N-player game vs a single-agent
    // ensemble drawn under the replication's seed: with measure-independent
    // coefficients the empirical measure enters nothing, so player p's cost
    // equals particle p's cost exactly.
    const PathEnsemble solo =
        simulate_forward(s.model, s.flow, s.field, 8, replication_seed(seed, 0));
    const PlayerCostTable one = simulate_nplayer(s.model, s.field, s.flow, 8, seed, 1);

    const TimeGrid& grid = s.grid;
    const double dt = grid.dt();
    DiscreteMeasure storage;
    for (int p = 0; p < 8; ++p) {
        double cost = 0.0;
        for (int j = 0; j < grid.n_steps; ++j) {
            const DiscreteMeasure& mu = detail::effective_measure(s.model, s.flow.at(j), storage);
            cost += s.model.f(grid.node(j), Vec::Constant(1, solo.states[j][p]), mu,
                              Vec::Constant(1, solo.controls[j][p])) *
                    dt;
        }
        const DiscreteMeasure& muT =
            detail::effective_measure(s.model, s.flow.at(grid.n_steps), storage);
        cost += s.model.g(Vec::Constant(1, solo.states[grid.n_steps][p]), muT);
        CHECK(one.mean[p] == doctest::Approx(cost).epsilon(1e-12));
    }
}

TEST_CASE("costs are deterministic in (N, seed) and worker count") {
    const Setup s = make_setup(coupled_spec());
    const PlayerCostTable a = simulate_nplayer(s.model, s.field, s.flow, 6, 11, 4);
    const PlayerCostTable b = simulate_nplayer(s.model, s.field, s.flow, 6, 11, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    set_thread_count(4);
    const PlayerCostTable c = simulate_nplayer(s.model, s.field, s.flow, 6, 11, 4);
    set_thread_count(1);
    CHECK(a.mean == c.mean);
}

TEST_CASE("per-player cost means are exchangeable") {
    const Setup s = make_setup(coupled_spec());
    const PlayerCostTable t = simulate_nplayer(s.model, s.field, s.flow, 8, 3, 60);
    for (long p = 1; p < t.n_players; ++p) {
        const double se =
            std::sqrt(t.std_error[p] * t.std_error[p] + t.std_error[0] * t.std_error[0]);
        CHECK(std::abs(t.mean[p] - t.mean[0]) <= 4.0 * se);
    }
}

TEST_CASE("equilibrium deviation improves nothing, zero control hurts") {
    const Setup s = make_setup(coupled_spec());
    const std::vector<DeviationStrategy> devs = {DeviationStrategy::equilibrium_rule(),
                                                 DeviationStrategy::zero_rule()};
    const NashGapReport report =
        deviation_sweep(s.model, s.field, s.flow, {8, 16, 32, 64}, {16}, devs, 60, 17);

    REQUIRE(report.deviations.size() == 2);
    CHECK(report.deviations[0].improvement == 0.0); // identical runs under CRN
    CHECK(report.deviations[0].std_error == 0.0);
    // Zero control is strictly worse by more than 3 standard errors.
    CHECK(report.deviations[1].improvement < -3.0 * report.deviations[1].std_error);
    CHECK(report.deviations[1].improvement < 0.0);
    CHECK(report.all_within_bound);
    CHECK(report.gaps.size() == 4);
    CHECK(report.limit_cost > 0.0);
}

TEST_CASE("large constant deviations hurt more as they grow") {
    const Setup s = make_setup(coupled_spec());
    // int |beta|^2 dt = c^2 T >= A for c = sqrt(A).
    const std::vector<DeviationStrategy> devs = {
        DeviationStrategy::constant_rule(Vec::Constant(1, std::sqrt(10.0))),
        DeviationStrategy::constant_rule(Vec::Constant(1, std::sqrt(100.0)))};
    const NashGapReport report =
        deviation_sweep(s.model, s.field, s.flow, {8, 12, 16, 24}, {16}, devs, 40, 23);
    REQUIRE(report.deviations.size() == 2);
    const double loss_small = -report.deviations[0].improvement;
    const double loss_large = -report.deviations[1].improvement;
    CHECK(loss_small > 0.0);
    CHECK(loss_large > 3.0 * loss_small);
}

TEST_CASE("refit deviation reproduces the equilibrium bitwise") {
    const Setup s = make_setup(coupled_spec());
    LatticeConfig cfg;
    cfg.spacing = 0.05;
    auto refit = DeviationStrategy::refit_rule(
        std::make_shared<DecouplingField>(solve_frozen_fbsde(s.model, s.flow, cfg)));
    const NashGapReport report =
        deviation_sweep(s.model, s.field, s.flow, {8, 12, 16, 24}, {8}, {refit}, 10, 5);
    REQUIRE(report.deviations.size() == 1);
    // Same flow, same lattice: the re-solved field is identical, so the
    // deviated run replays the baseline exactly.
    CHECK(report.deviations[0].improvement == 0.0);
}

TEST_CASE("chaos table decays for a drift-coupled spec") {
    const Setup s = make_setup(coupled_spec());
    const ChaosTable table = chaos_experiment(s.model, s.field, s.flow, {8, 32, 128}, 80, 29);
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) {
        CHECK(row.coupling_error > 0.0);
        CHECK(row.w2_sup > 0.0);
    }
    // Coupling error decreases and respects the bound calibrated at N=8.
    const double c = table.rows[0].coupling_error / std::pow(8.0, -0.4);
    for (const auto& row : table.rows)
        CHECK(row.coupling_error <= c * std::pow(static_cast<double>(row.n_players), -0.4) * 1.001);
    CHECK(table.rows[2].coupling_error < table.rows[0].coupling_error);
    CHECK(table.coupling_slope < -0.35);
}

TEST_CASE("deviation parsing") {
    CHECK(DeviationStrategy::parse("equilibrium").kind == DeviationStrategy::Kind::equilibrium);
    CHECK(DeviationStrategy::parse("scale:0.9").scale == doctest::Approx(0.9));
    CHECK(DeviationStrategy::parse("zero").kind == DeviationStrategy::Kind::zero);
    CHECK(DeviationStrategy::parse("constant:1.5").constant[0] == doctest::Approx(1.5));
    CHECK_THROWS_AS(DeviationStrategy::parse("nonsense"), InvalidArgument);
}

TEST_CASE("input validation") {
    const Setup s = make_setup(mean_free_spec());
    CHECK_THROWS_AS(simulate_nplayer(s.model, s.field, s.flow, 0, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(chaos_experiment(s.model, s.field, s.flow, {4, 2}, 5, 1), InvalidArgument);
    CHECK_THROWS_AS(chaos_experiment(s.model, s.field, s.flow, {2, 4}, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(
        deviation_sweep(s.model, s.field, s.flow, {4, 8, 12, 16}, {4}, {}, 10, 1),
        InvalidArgument);
}
