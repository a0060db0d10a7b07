#pragma once

#include "fbsde.hpp"

namespace mfg {

struct FixedPointConfig {
    double damping = 0.5;    // theta in (0, 1]
    double tolerance = 0.01; // fixed-point residual in W_2 units
    int max_iters = 50;
    int n_particles = 20000;
    int support_size = 512;
    LatticeConfig lattice;
    std::uint64_t seed = 42;
    bool check_uniqueness = false;

    void validate() const;
};

struct PhiResult {
    MeasureFlow flow;
    DecouplingField field;
    PathEnsemble paths;
};

// The measure map: solve the frozen-flow adjoint system, simulate the
// optimally controlled state with frozen common random numbers (the same
// Brownian draws on every call with the same seed), and return the
// empirical law thinned to the configured support size.
PhiResult phi_map_full(const MfgModel& model, const MeasureFlow& flow,
                       const FixedPointConfig& config);
MeasureFlow phi_map(const MfgModel& model, const MeasureFlow& flow,
                    const FixedPointConfig& config);

struct MfgSolution {
    MeasureFlow flow;
    DecouplingField field;
    CostEstimate cost;
    EnsembleSummary ensemble; // moment summary of the final particle system
    std::vector<double> residual_history; // sup_t W_2(Phi(mu^k)_t, mu^k_t) per iteration
    bool converged = false;
    // Distance between the limits of two differently initialized runs;
    // set when check_uniqueness is on.
    std::optional<double> uniqueness_gap;
};

// Damped Picard iteration mu^{k+1} = (1-theta) mu^k + theta Phi(mu^k)
// (support-wise weight mixture, then thinning). Reports non-convergence
// rather than raising: divergence (residual increasing five times in a row)
// and budget exhaustion both return converged = false with full history.
MfgSolution solve_mfg(const MfgModel& model, const TimeGrid& grid, const FixedPointConfig& config);

// Residual between two flows: sup over nodes of W_2.
double flow_residual(const MeasureFlow& a, const MeasureFlow& b);

} // namespace mfg
