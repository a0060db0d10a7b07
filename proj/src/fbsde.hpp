#pragma once

#include "decoupling_field.hpp"
#include "hamiltonian.hpp"
#include "measure.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace mfg {

// Backward lattice sweep for the frozen-flow adjoint system. At each time
// step the implicit one-step relation
//   y = E_xi[ u(t_{j+1}, x + b(t_j,x,mu_j,a(y)) dt + sigma sqrt(dt) xi) ]
//       + dt (b1' y + df_dx(t_j, x, mu_j, a(y)))
// is solved per lattice node by Picard iteration (Gauss-Hermite quadrature
// in xi, multilinear interpolation with linear extrapolation in space).
// Terminal condition u(T, .) = dg_dx(., mu_T) holds exactly on the lattice.
DecouplingField solve_frozen_fbsde(const MfgModel& model, const MeasureFlow& flow,
                                   const LatticeConfig& config);

// Controlled Euler-Maruyama paths with the optimal feedback read off the
// decoupling field. Deterministic given the seed; per-particle counter-based
// noise streams make results independent of worker count.
struct PathEnsemble {
    TimeGrid grid;
    int n_particles = 0;
    int d = 1, k = 1;
    std::vector<std::vector<double>> states;   // [node][particle*d + c]
    std::vector<std::vector<double>> controls; // [node < n_steps][particle*k + c]
    std::vector<std::vector<double>> adjoints; // [node][particle*d + c], Y = u(t, X)
    std::uint64_t seed = 0;
    std::string noise_stream = "paths";
};

PathEnsemble simulate_forward(const MfgModel& model, const MeasureFlow& flow,
                              const DecouplingField& field, int n_particles, std::uint64_t seed);

struct CostEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
};

// Monte Carlo cost J = E[g(X_T, mu_T) + sum_j f(t_j, X_j, mu_j, a_j) dt].
CostEstimate evaluate_cost(const MfgModel& model, const PathEnsemble& paths,
                           const MeasureFlow& flow);

// Empirical law of the ensemble, thinned to the given support size.
MeasureFlow empirical_flow(const PathEnsemble& paths, int support_size, std::uint64_t seed);

// Per-time-node moments of an ensemble (the CSV-facing summary).
struct EnsembleSummary {
    TimeGrid grid;
    int d = 1, k = 1;
    std::vector<double> state_mean;   // [node*d + c]
    std::vector<double> state_sd;     // [node*d + c]
    std::vector<double> control_mean; // [node*k + c], nodes 0..n_steps-1
    std::vector<double> adjoint_mean; // [node*d + c]
};

EnsembleSummary summarize_ensemble(const PathEnsemble& paths);

// Seed for replication `rep` such that an N-player replication reproduces
// single-agent paths drawn with simulate_forward under this seed.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t rep);

namespace detail {

// Coefficients cached once per time step; mu is already the effective
// (possibly mean-collapsed) measure.
struct StepCoefficients {
    double t = 0.0;
    Vec b0;
    Mat b1, b2;
    std::optional<Mat> lq_gain; // alpha = lq_gain * y when the model is LQ
};

StepCoefficients step_coefficients(const MfgModel& model, double t, const DiscreteMeasure& mu);

// Substitute a Dirac at the mean when coefficients only read the mean.
const DiscreteMeasure& effective_measure(const MfgModel& model, const DiscreteMeasure& mu,
                                         DiscreteMeasure& storage);

void control_at(const MfgModel& model, const StepCoefficients& coef, const Vec& x,
                const DiscreteMeasure& mu, const Vec& y, Vec& alpha);

// Gaussian increments for (particle, step): fills xi with m standard normals.
void draw_noise(const rng::Stream& stream, std::uint64_t particle, std::uint32_t step, Vec& xi);

} // namespace detail

} // namespace mfg
