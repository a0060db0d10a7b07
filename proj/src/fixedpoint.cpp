#include "fixedpoint.hpp"

#include "wasserstein.hpp"

#include <cmath>

namespace mfg {

void FixedPointConfig::validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("damping must be in (0, 1]");
    if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    if (n_particles < 100) throw InvalidArgument("n_particles must be >= 100");
    if (support_size < 1) throw InvalidArgument("support_size must be >= 1");
}

PhiResult phi_map_full(const MfgModel& model, const MeasureFlow& flow,
                       const FixedPointConfig& config) {
    config.validate();
    PhiResult out;
    out.field = solve_frozen_fbsde(model, flow, config.lattice);
    out.paths = simulate_forward(model, flow, out.field, config.n_particles, config.seed);
    out.flow = empirical_flow(out.paths, config.support_size, config.seed);
    return out;
}

MeasureFlow phi_map(const MfgModel& model, const MeasureFlow& flow,
                    const FixedPointConfig& config) {
    return phi_map_full(model, flow, config).flow;
}

double flow_residual(const MeasureFlow& a, const MeasureFlow& b) {
    if (!(a.grid == b.grid)) throw InvalidArgument("flows live on different grids");
    double worst = 0.0;
    for (std::size_t j = 0; j < a.measures.size(); ++j) {
        const double w = (a.measures[j].dim() == 1) ? w2_1d(a.measures[j], b.measures[j])
                                                    : w2_exact(a.measures[j], b.measures[j]);
        worst = std::max(worst, w);
    }
    return worst;
}

namespace {

MeasureFlow initial_flow(const MfgModel& model, const TimeGrid& grid) {
    return MeasureFlow::constant(grid, DiscreteMeasure::dirac(model.x0));
}

MeasureFlow damped_update(const MeasureFlow& current, const MeasureFlow& image, double theta,
                          int support_size, std::uint64_t seed, int iteration) {
    MeasureFlow next;
    next.grid = current.grid;
    next.measures.reserve(current.measures.size());
    const rng::Stream stream = rng::Stream(seed, "thin_mix").child(iteration);
    for (std::size_t j = 0; j < current.measures.size(); ++j)
        next.measures.push_back(
            thin(mix(current.measures[j], image.measures[j], theta), support_size, stream.child(j)));
    return next;
}

struct IterationOutcome {
    MeasureFlow flow; // the flow Phi was evaluated at
    DecouplingField field;
    PathEnsemble paths;
    std::vector<double> history;
    bool converged = false;
};

IterationOutcome iterate(const MfgModel& model, const FixedPointConfig& config,
                         const MeasureFlow& start) {
    IterationOutcome out;
    MeasureFlow flow = start;
    int rising = 0;
    for (int k = 0; k < config.max_iters; ++k) {
        PhiResult phi = phi_map_full(model, flow, config);
        const double residual = flow_residual(phi.flow, flow);
        out.history.push_back(residual);

        const bool last = (k == config.max_iters - 1);
        if (residual <= config.tolerance) {
            out.converged = true;
            out.flow = std::move(flow);
            out.field = std::move(phi.field);
            out.paths = std::move(phi.paths);
            return out;
        }
        if (out.history.size() >= 2 && residual > out.history[out.history.size() - 2])
            ++rising;
        else
            rising = 0;
        if (rising >= 5 || last) {
            // Divergence or exhausted budget: report what we saw, never
            // claim convergence that was not observed.
            out.flow = std::move(flow);
            out.field = std::move(phi.field);
            out.paths = std::move(phi.paths);
            return out;
        }
        flow = damped_update(flow, phi.flow, config.damping, config.support_size, config.seed, k);
    }
    return out; // unreachable; loop always returns
}

} // namespace

MfgSolution solve_mfg(const MfgModel& model, const TimeGrid& grid, const FixedPointConfig& config) {
    config.validate();
    if (model.lq) {
        const auto report = check_lq_assumptions(*model.lq);
        if (report.solver_blocked())
            throw AssumptionViolation("LQ spec fails convexity checks:\n" + report.summary());
    } else {
        const auto report = validate_model(model, 32, config.seed);
        if (!report.all_passed() && report.solver_blocked())
            throw AssumptionViolation("model fails sampled assumption checks:\n" + report.summary());
    }

    IterationOutcome main = iterate(model, config, initial_flow(model, grid));

    MfgSolution sol;
    sol.converged = main.converged;
    sol.residual_history = main.history;
    sol.flow = std::move(main.flow);
    sol.field = std::move(main.field);
    sol.cost = evaluate_cost(model, main.paths, sol.flow);
    sol.ensemble = summarize_ensemble(main.paths);

    if (config.check_uniqueness && sol.converged) {
        // Re-run from a shifted initialization and compare the limits.
        MeasureFlow shifted = initial_flow(model, grid);
        const Vec offset = Vec::Constant(model.d, 1.0 + model.x0.norm());
        for (auto& mu : shifted.measures) mu = mu.shifted(offset);
        IterationOutcome alt = iterate(model, config, shifted);
        if (alt.converged) sol.uniqueness_gap = flow_residual(alt.flow, sol.flow);
    }
    return sol;
}

} // namespace mfg
