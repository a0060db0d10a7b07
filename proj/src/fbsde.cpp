#include "fbsde.hpp"

#include "parallel.hpp"
#include "quadrature.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>

namespace mfg {

namespace detail {

const DiscreteMeasure& effective_measure(const MfgModel& model, const DiscreteMeasure& mu,
                                         DiscreteMeasure& storage) {
    if (model.measure_dep == MeasureDependence::full) return mu;
    storage = DiscreteMeasure::dirac(mu.mean());
    return storage;
}

StepCoefficients step_coefficients(const MfgModel& model, double t, const DiscreteMeasure& mu) {
    StepCoefficients c;
    c.t = t;
    c.b0 = model.b0(t, mu);
    c.b1 = model.b1(t);
    c.b2 = model.b2(t);
    if (model.lq) {
        const Mat& n = model.lq->n.at(t);
        c.lq_gain = -(n.transpose() * n).ldlt().solve(c.b2.transpose()).eval();
    }
    return c;
}

void control_at(const MfgModel& model, const StepCoefficients& coef, const Vec& x,
                const DiscreteMeasure& mu, const Vec& y, Vec& alpha) {
    if (coef.lq_gain) {
        alpha.noalias() = (*coef.lq_gain) * y;
    } else {
        alpha = minimize_hamiltonian(model, coef.t, x, mu, y);
    }
}

void draw_noise(const rng::Stream& stream, std::uint64_t particle, std::uint32_t step, Vec& xi) {
    const int m = static_cast<int>(xi.size());
    for (int pair = 0; 2 * pair < m; ++pair) {
        const auto [z0, z1] = stream.normal_pair(particle, rng::pack(step, pair));
        xi[2 * pair] = z0;
        if (2 * pair + 1 < m) xi[2 * pair + 1] = z1;
    }
}

} // namespace detail

namespace {

SpatialLattice build_lattice(const MfgModel& model, const LatticeConfig& config) {
    if (model.d > 2)
        throw InvalidArgument("lattice solver supports d <= 2; higher d is rejected");
    const double default_radius =
        std::max(6.0 * model.sigma.norm() * std::sqrt(model.T),
                 4.0 * (1.0 + model.x0.norm()) * std::exp(model.c_L * model.T));
    const double radius = config.radius.value_or(default_radius);
    if (!(radius > 0.0) || !(config.spacing > 0.0))
        throw InvalidArgument("lattice radius and spacing must be positive");

    SpatialLattice lattice;
    lattice.dim = model.d;
    lattice.spacing = config.spacing;
    lattice.lower = Vec(model.d);
    const int count = static_cast<int>(std::ceil(2.0 * radius / config.spacing)) + 1;
    if (count < 2) throw InvalidArgument("lattice must have at least two nodes per axis");
    for (int a = 0; a < model.d; ++a) lattice.lower[a] = model.x0[a] - radius;
    lattice.counts = {count, model.d == 2 ? count : 1};
    return lattice;
}

} // namespace

DecouplingField solve_frozen_fbsde(const MfgModel& model, const MeasureFlow& flow,
                                   const LatticeConfig& config) {
    const TimeGrid& grid = flow.grid;
    if (static_cast<int>(flow.measures.size()) != grid.n_nodes())
        throw InvalidArgument("flow does not cover the time grid");
    if (!(model.lambda > 0.0))
        throw AssumptionViolation("model convexity constant lambda must be positive");

    DecouplingField field;
    field.grid = grid;
    field.lattice = build_lattice(model, config);
    field.value_dim = model.d;
    field.values.assign(grid.n_nodes(),
                        std::vector<double>(static_cast<std::size_t>(field.lattice.n_nodes()) *
                                            model.d));

    const int n_nodes = field.lattice.n_nodes();
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);

    // Shifted quadrature points sigma * sqrt(dt) * xi, one per tensor node.
    const GaussHermiteTensor quad(config.quad_order, model.m);
    std::vector<Vec> shifts(quad.nodes.size());
    for (std::size_t q = 0; q < quad.nodes.size(); ++q)
        shifts[q] = model.sigma * quad.nodes[q] * sqrt_dt;

    // Terminal condition.
    {
        DiscreteMeasure storage;
        const DiscreteMeasure& mu_T =
            detail::effective_measure(model, flow.at(grid.n_steps), storage);
        auto& terminal = field.values[grid.n_steps];
        parallel_chunks(n_nodes, 256, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const Vec g = model.dg_dx(field.lattice.node(static_cast<int>(i)), mu_T);
                for (int c = 0; c < model.d; ++c) terminal[i * model.d + c] = g[c];
            }
        });
    }

    // Out-of-bounds bookkeeping: quadrature points beyond the padded box.
    const double pad = config.extrapolation_margin *
                       (field.lattice.upper(0) - field.lattice.lower[0]) * 0.5;
    std::vector<long> oob_per_chunk;

    for (int j = grid.n_steps - 1; j >= 0; --j) {
        const double t = grid.node(j);
        DiscreteMeasure storage;
        const DiscreteMeasure& mu = detail::effective_measure(model, flow.at(j), storage);
        const detail::StepCoefficients coef = detail::step_coefficients(model, t, mu);

        auto& out = field.values[j];
        const std::size_t n_chunks = (n_nodes + 255) / 256;
        oob_per_chunk.assign(n_chunks, 0);

        std::atomic<bool> failed{false};
        std::string failure;
        std::mutex failure_mutex;

        parallel_chunks(n_nodes, 256, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            Vec y(model.d), y_new(model.d), alpha(model.k), drift(model.d), base(model.d),
                probe(model.d), interp(model.d), expectation(model.d), residual_vec(model.d),
                y_try(model.d), r_try(model.d);
            long oob = 0;
            for (std::size_t i = begin; i < end && !failed.load(std::memory_order_relaxed); ++i) {
                const Vec x = field.lattice.node(static_cast<int>(i));

                // One evaluation of the implicit one-step map at y.
                auto rhs = [&](const Vec& y_in, Vec& out) {
                    detail::control_at(model, coef, x, mu, y_in, alpha);
                    drift = coef.b0;
                    drift.noalias() += coef.b1 * x;
                    drift.noalias() += coef.b2 * alpha;
                    base = x + dt * drift;

                    expectation.setZero();
                    for (std::size_t q = 0; q < shifts.size(); ++q) {
                        probe = base + shifts[q];
                        for (int a = 0; a < model.d; ++a) {
                            if (probe[a] < field.lattice.lower[a] - pad ||
                                probe[a] > field.lattice.upper(a) + pad)
                                ++oob;
                        }
                        field.eval_into(j + 1, probe, interp);
                        expectation.noalias() += quad.weights[q] * interp;
                    }
                    out = expectation;
                    out.noalias() += dt * (coef.b1.transpose() * y_in);
                    out.noalias() += dt * model.df_dx(t, x, mu, alpha);
                };

                for (int c = 0; c < model.d; ++c) y[c] = field.values[j + 1][i * model.d + c];
                rhs(y, y_new);
                residual_vec = y_new - y;
                double residual = residual_vec.norm();

                // Picard with residual-monotone damping: full steps while the
                // map contracts, halved steps when one time step is too
                // coarse for plain iteration.
                bool converged = residual <= config.inner_tol;
                double omega = 1.0;
                for (int iter = 0; iter < config.inner_max_iters && !converged; ++iter) {
                    y_try = y + omega * residual_vec;
                    rhs(y_try, y_new);
                    r_try = y_new - y_try;
                    const double r_norm = r_try.norm();
                    if (r_norm < residual) {
                        y = y_try;
                        residual_vec = r_try;
                        residual = r_norm;
                        omega = std::min(1.0, 1.5 * omega);
                        if (residual <= config.inner_tol) converged = true;
                    } else {
                        omega *= 0.5;
                        if (omega < 1e-6) break;
                    }
                }
                if (!converged) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failed.exchange(true)) {
                        std::ostringstream msg;
                        msg << "inner Picard iteration failed to contract at step " << j
                            << ", lattice node " << i << " (residual " << residual << ")";
                        failure = msg.str();
                    }
                    return;
                }
                for (int c = 0; c < model.d; ++c) out[i * model.d + c] = y[c];
            }
            oob_per_chunk[chunk] = oob;
        });
        if (failed.load()) throw SolverError(failure, 0.0, config.inner_max_iters);
        for (long c : oob_per_chunk) field.out_of_bounds_warnings += c;
    }
    return field;
}

PathEnsemble simulate_forward(const MfgModel& model, const MeasureFlow& flow,
                              const DecouplingField& field, int n_particles, std::uint64_t seed) {
    const TimeGrid& grid = flow.grid;
    if (!(field.grid == grid)) throw InvalidArgument("field and flow must share the time grid");
    if (n_particles < 1) throw InvalidArgument("need at least one particle");

    PathEnsemble ens;
    ens.grid = grid;
    ens.n_particles = n_particles;
    ens.d = model.d;
    ens.k = model.k;
    ens.seed = seed;
    ens.states.assign(grid.n_nodes(),
                      std::vector<double>(static_cast<std::size_t>(n_particles) * model.d));
    ens.controls.assign(grid.n_steps,
                        std::vector<double>(static_cast<std::size_t>(n_particles) * model.k));
    ens.adjoints.assign(grid.n_nodes(),
                        std::vector<double>(static_cast<std::size_t>(n_particles) * model.d));

    for (int p = 0; p < n_particles; ++p)
        for (int c = 0; c < model.d; ++c) ens.states[0][static_cast<std::size_t>(p) * model.d + c] = model.x0[c];

    const rng::Stream stream(seed, ens.noise_stream);
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);

    for (int j = 0; j < grid.n_steps; ++j) {
        const double t = grid.node(j);
        DiscreteMeasure storage;
        const DiscreteMeasure& mu = detail::effective_measure(model, flow.at(j), storage);
        const detail::StepCoefficients coef = detail::step_coefficients(model, t, mu);

        parallel_chunks(n_particles, 1024, [&](std::size_t, std::size_t begin, std::size_t end) {
            Vec x(model.d), y(model.d), alpha(model.k), drift(model.d), xi(model.m), next(model.d);
            for (std::size_t p = begin; p < end; ++p) {
                for (int c = 0; c < model.d; ++c) x[c] = ens.states[j][p * model.d + c];
                field.eval_into(j, x, y);
                detail::control_at(model, coef, x, mu, y, alpha);
                detail::draw_noise(stream, p, static_cast<std::uint32_t>(j), xi);
                drift = coef.b0;
                drift.noalias() += coef.b1 * x;
                drift.noalias() += coef.b2 * alpha;
                next = x + dt * drift;
                next.noalias() += sqrt_dt * (model.sigma * xi);
                for (int c = 0; c < model.d; ++c) {
                    ens.states[j + 1][p * model.d + c] = next[c];
                    ens.adjoints[j][p * model.d + c] = y[c];
                }
                for (int c = 0; c < model.k; ++c) ens.controls[j][p * model.k + c] = alpha[c];
            }
        });
    }

    // Adjoint at the terminal node, plus an overflow check.
    parallel_chunks(n_particles, 1024, [&](std::size_t, std::size_t begin, std::size_t end) {
        Vec x(model.d), y(model.d);
        for (std::size_t p = begin; p < end; ++p) {
            for (int c = 0; c < model.d; ++c) x[c] = ens.states[grid.n_steps][p * model.d + c];
            field.eval_into(grid.n_steps, x, y);
            for (int c = 0; c < model.d; ++c) ens.adjoints[grid.n_steps][p * model.d + c] = y[c];
        }
    });
    for (const auto& slab : ens.states)
        for (double v : slab)
            if (!std::isfinite(v)) throw SolverError("forward simulation overflowed", 0.0, 0);
    return ens;
}

CostEstimate evaluate_cost(const MfgModel& model, const PathEnsemble& paths,
                           const MeasureFlow& flow) {
    if (!(paths.grid == flow.grid)) throw InvalidArgument("paths and flow must share the time grid");
    const TimeGrid& grid = paths.grid;
    const double dt = grid.dt();
    const int P = paths.n_particles;

    std::vector<double> per_particle(P, 0.0);
    std::vector<DiscreteMeasure> eff(grid.n_nodes());
    for (int j = 0; j < grid.n_nodes(); ++j) {
        DiscreteMeasure storage;
        eff[j] = detail::effective_measure(model, flow.at(j), storage);
    }

    parallel_chunks(P, 512, [&](std::size_t, std::size_t begin, std::size_t end) {
        Vec x(model.d), alpha(model.k);
        for (std::size_t p = begin; p < end; ++p) {
            double acc = 0.0;
            for (int j = 0; j < grid.n_steps; ++j) {
                for (int c = 0; c < model.d; ++c) x[c] = paths.states[j][p * model.d + c];
                for (int c = 0; c < model.k; ++c) alpha[c] = paths.controls[j][p * model.k + c];
                acc += model.f(grid.node(j), x, eff[j], alpha) * dt;
            }
            for (int c = 0; c < model.d; ++c) x[c] = paths.states[grid.n_steps][p * model.d + c];
            acc += model.g(x, eff[grid.n_steps]);
            per_particle[p] = acc;
        }
    });

    double sum = 0.0, sumsq = 0.0;
    for (double v : per_particle) {
        sum += v;
        sumsq += v * v;
    }
    CostEstimate est;
    est.n_samples = P;
    est.value = sum / P;
    const double var = (P > 1) ? std::max(0.0, (sumsq - P * est.value * est.value) / (P - 1)) : 0.0;
    est.std_error = std::sqrt(var / P);
    return est;
}

MeasureFlow empirical_flow(const PathEnsemble& paths, int support_size, std::uint64_t seed) {
    MeasureFlow flow;
    flow.grid = paths.grid;
    flow.measures.reserve(paths.grid.n_nodes());
    const rng::Stream thin_stream(seed, "thin");
    for (int j = 0; j < paths.grid.n_nodes(); ++j) {
        DiscreteMeasure cloud = DiscreteMeasure::uniform(paths.d, paths.states[j]);
        flow.measures.push_back(thin(cloud, support_size, thin_stream.child(j)));
    }
    return flow;
}

EnsembleSummary summarize_ensemble(const PathEnsemble& paths) {
    EnsembleSummary s;
    s.grid = paths.grid;
    s.d = paths.d;
    s.k = paths.k;
    const int nodes = paths.grid.n_nodes();
    const int P = paths.n_particles;
    s.state_mean.assign(static_cast<std::size_t>(nodes) * paths.d, 0.0);
    s.state_sd.assign(static_cast<std::size_t>(nodes) * paths.d, 0.0);
    s.adjoint_mean.assign(static_cast<std::size_t>(nodes) * paths.d, 0.0);
    s.control_mean.assign(static_cast<std::size_t>(paths.grid.n_steps) * paths.k, 0.0);

    for (int j = 0; j < nodes; ++j) {
        for (int c = 0; c < paths.d; ++c) {
            double sum = 0.0, sumsq = 0.0, asum = 0.0;
            for (int p = 0; p < P; ++p) {
                const double v = paths.states[j][static_cast<std::size_t>(p) * paths.d + c];
                sum += v;
                sumsq += v * v;
                asum += paths.adjoints[j][static_cast<std::size_t>(p) * paths.d + c];
            }
            const double mean = sum / P;
            s.state_mean[static_cast<std::size_t>(j) * paths.d + c] = mean;
            s.state_sd[static_cast<std::size_t>(j) * paths.d + c] =
                (P > 1) ? std::sqrt(std::max(0.0, (sumsq - P * mean * mean) / (P - 1))) : 0.0;
            s.adjoint_mean[static_cast<std::size_t>(j) * paths.d + c] = asum / P;
        }
        if (j < paths.grid.n_steps) {
            for (int c = 0; c < paths.k; ++c) {
                double sum = 0.0;
                for (int p = 0; p < P; ++p)
                    sum += paths.controls[j][static_cast<std::size_t>(p) * paths.k + c];
                s.control_mean[static_cast<std::size_t>(j) * paths.k + c] = sum / P;
            }
        }
    }
    return s;
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t rep) {
    return rng::detail::splitmix64(seed ^ (0xA3EC4F1D27B9C681ull * (rep + 1)));
}

} // namespace mfg
