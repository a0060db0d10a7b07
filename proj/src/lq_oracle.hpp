#pragma once

#include "measure.hpp"
#include "model.hpp"
#include "time_grid.hpp"

namespace mfg {

// Analytic equilibrium of the LQ game: adjoint field u(t,x) = eta_t x + chi_t,
// equilibrium mean path xbar_t, state covariance, feedback rule and cost.
struct RiccatiSolution {
    TimeGrid grid;
    std::vector<Mat> eta;  // one d x d matrix per node
    std::vector<Vec> chi;  // one d-vector per node
    std::vector<Vec> xbar; // equilibrium mean path
    std::vector<Mat> cov;  // state covariance along the equilibrium
    double cost = 0.0;     // J

    // Internal half-step samples kept for accurate quadrature and for
    // callers needing mid-node values (2*n_steps+1 entries, spacing dt/2).
    std::vector<Mat> eta_half;
    std::vector<Vec> chi_half, xbar_half;

    Vec field_at(double t, const Vec& x) const;      // eta_t x + chi_t (linear in t between nodes)
    Vec alpha_feedback(double t, const Vec& x) const; // -(n'n)^{-1} b2' (eta_t x + chi_t)

    // Quantile discretization of the Gaussian equilibrium law at each node
    // (d = 1 only); this flow is a fixed point of the measure map up to
    // discretization.
    MeasureFlow equilibrium_flow(int support_size) const;

    std::shared_ptr<const LqSpec> spec;
};

// Solves the matrix Riccati ODE backward (RK4 on a refined grid) and the
// coupled linear two-point boundary system for (xbar, chi) by fundamental-
// matrix assembly and one linear solve. Throws AssumptionViolation on
// convexity failure and SolverError when the boundary system is singular.
RiccatiSolution solve_lq_riccati(const LqSpec& spec, const TimeGrid& grid);

// Closed-form value expansion: deterministic quadratic terms along
// (xbar, chi) plus the noise contribution 1/2 int trace(sigma' eta sigma) dt.
double lq_cost(const RiccatiSolution& sol, const LqSpec& spec);

} // namespace mfg
