#include "mfg/mfg.h"

#include "../config.hpp"
#include "../io.hpp"
#include "../lq_oracle.hpp"
#include "../parallel.hpp"
#include "../runner.hpp"
#include "../version.hpp"
#include "../wasserstein.hpp"

#include <cstring>
#include <string>

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Translates C++ failures into status codes and records the message.
template <typename Fn>
mfg_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const mfg::InvalidArgument& e) {
        g_last_error = e.what();
        return MFG_ERR_INVALID_ARGUMENT;
    } catch (const mfg::AssumptionViolation& e) {
        g_last_error = e.what();
        return MFG_ERR_ASSUMPTION;
    } catch (const mfg::SolverError& e) {
        g_last_error = e.what();
        return MFG_ERR_SOLVER;
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return MFG_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MFG_ERR_INTERNAL;
    }
}

} // namespace

struct mfg_measure {
    mfg::DiscreteMeasure value;
};

struct mfg_lq_spec {
    mfg::LqSpec value;
};

struct mfg_riccati {
    mfg::RiccatiSolution value;
};

extern "C" {

const char* mfg_version(void) { return mfg::kVersion; }

const char* mfg_status_name(mfg_status status) {
    switch (status) {
    case MFG_OK: return "ok";
    case MFG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MFG_ERR_ASSUMPTION: return "assumption violation";
    case MFG_ERR_SOLVER: return "solver error";
    case MFG_ERR_NOT_CONVERGED: return "not converged";
    case MFG_ERR_IO: return "io error";
    case MFG_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

const char* mfg_last_error(void) { return g_last_error.c_str(); }

void mfg_string_free(char* s) { delete[] s; }

void mfg_set_threads(int n) { mfg::set_thread_count(n); }

mfg_status mfg_measure_create(int dim, const double* points, const double* weights, int n_atoms,
                              mfg_measure** out) {
    return guarded([&]() {
        if (!points || !out || n_atoms < 1) {
            g_last_error = "measure_create: null output/points or empty support";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        std::vector<double> pts(points, points + static_cast<std::size_t>(n_atoms) * dim);
        std::vector<double> w =
            weights ? std::vector<double>(weights, weights + n_atoms)
                    : std::vector<double>(n_atoms, 1.0 / n_atoms);
        *out = new mfg_measure{mfg::DiscreteMeasure(dim, std::move(pts), std::move(w))};
        return MFG_OK;
    });
}

void mfg_measure_free(mfg_measure* mu) { delete mu; }

mfg_status mfg_measure_mean(const mfg_measure* mu, double* out) {
    return guarded([&]() {
        if (!mu || !out) {
            g_last_error = "measure_mean: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        const mfg::Vec m = mu->value.mean();
        for (int i = 0; i < m.size(); ++i) out[i] = m[i];
        return MFG_OK;
    });
}

mfg_status mfg_measure_moment(const mfg_measure* mu, int order, double* out) {
    return guarded([&]() {
        if (!mu || !out) {
            g_last_error = "measure_moment: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        *out = mu->value.moment(order);
        return MFG_OK;
    });
}

mfg_status mfg_w2_1d(const mfg_measure* a, const mfg_measure* b, double* out) {
    return guarded([&]() {
        if (!a || !b || !out) {
            g_last_error = "w2_1d: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        *out = mfg::w2_1d(a->value, b->value);
        return MFG_OK;
    });
}

mfg_status mfg_w2_exact(const mfg_measure* a, const mfg_measure* b, double* out) {
    return guarded([&]() {
        if (!a || !b || !out) {
            g_last_error = "w2_exact: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        *out = mfg::w2_exact(a->value, b->value);
        return MFG_OK;
    });
}

mfg_status mfg_w1_exact(const mfg_measure* a, const mfg_measure* b, double* out) {
    return guarded([&]() {
        if (!a || !b || !out) {
            g_last_error = "w1_exact: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        *out = mfg::w1_exact(a->value, b->value);
        return MFG_OK;
    });
}

mfg_status mfg_lq_spec_parse(const char* json_text, mfg_lq_spec** out) {
    return guarded([&]() {
        if (!json_text || !out) {
            g_last_error = "lq_spec_parse: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        mfg::Json doc;
        try {
            doc = mfg::Json::parse(json_text);
        } catch (const std::exception& e) {
            g_last_error = std::string("lq_spec_parse: ") + e.what();
            return MFG_ERR_INVALID_ARGUMENT;
        }
        *out = new mfg_lq_spec{mfg::lq_spec_from_json(doc)};
        return MFG_OK;
    });
}

void mfg_lq_spec_free(mfg_lq_spec* spec) { delete spec; }

mfg_status mfg_lq_spec_check(const mfg_lq_spec* spec, char** report_json) {
    return guarded([&]() {
        if (!spec || !report_json) {
            g_last_error = "lq_spec_check: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        const mfg::AssumptionReport report = mfg::check_lq_assumptions(spec->value);
        mfg::Json checks = mfg::Json::array();
        for (const auto& c : report.checks) {
            mfg::Json item;
            item["name"] = c.name;
            item["passed"] = c.passed;
            item["solver_blocking"] = c.solver_blocking;
            item["detail"] = c.detail;
            checks.push_back(item);
        }
        mfg::Json j;
        j["checks"] = checks;
        j["all_passed"] = report.all_passed();
        j["solver_blocked"] = report.solver_blocked();
        *report_json = dup_string(j.dump(2));
        return MFG_OK;
    });
}

mfg_status mfg_riccati_solve(const mfg_lq_spec* spec, int n_steps, mfg_riccati** out) {
    return guarded([&]() {
        if (!spec || !out || n_steps < 1) {
            g_last_error = "riccati_solve: null argument or bad n_steps";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        *out = new mfg_riccati{
            mfg::solve_lq_riccati(spec->value, mfg::TimeGrid(spec->value.T, n_steps))};
        return MFG_OK;
    });
}

void mfg_riccati_free(mfg_riccati* sol) { delete sol; }

int mfg_riccati_n_nodes(const mfg_riccati* sol) {
    return sol ? sol->value.grid.n_nodes() : 0;
}

int mfg_riccati_dim(const mfg_riccati* sol) {
    return sol ? static_cast<int>(sol->value.xbar.front().size()) : 0;
}

mfg_status mfg_riccati_node(const mfg_riccati* sol, int node, double* t, double* eta, double* chi,
                            double* xbar) {
    return guarded([&]() {
        if (!sol || node < 0 || node >= sol->value.grid.n_nodes()) {
            g_last_error = "riccati_node: null handle or node out of range";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        const int d = static_cast<int>(sol->value.xbar.front().size());
        if (t) *t = sol->value.grid.node(node);
        if (eta)
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) eta[r * d + c] = sol->value.eta[node](r, c);
        if (chi)
            for (int c = 0; c < d; ++c) chi[c] = sol->value.chi[node][c];
        if (xbar)
            for (int c = 0; c < d; ++c) xbar[c] = sol->value.xbar[node][c];
        return MFG_OK;
    });
}

mfg_status mfg_riccati_cost(const mfg_riccati* sol, double* out) {
    return guarded([&]() {
        if (!sol || !out) {
            g_last_error = "riccati_cost: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        *out = sol->value.cost;
        return MFG_OK;
    });
}

mfg_status mfg_riccati_feedback(const mfg_riccati* sol, double t, const double* x,
                                double* alpha_out) {
    return guarded([&]() {
        if (!sol || !x || !alpha_out) {
            g_last_error = "riccati_feedback: null argument";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        const int d = static_cast<int>(sol->value.xbar.front().size());
        mfg::Vec xv(d);
        for (int c = 0; c < d; ++c) xv[c] = x[c];
        const mfg::Vec a = sol->value.alpha_feedback(t, xv);
        for (int c = 0; c < a.size(); ++c) alpha_out[c] = a[c];
        return MFG_OK;
    });
}

mfg_status mfg_run(const char* command, const char* config_json, const char* out_dir,
                   const uint64_t* seed_override, int quiet, char** run_dir_out) {
    return guarded([&]() {
        if (!command || !config_json || !out_dir) {
            g_last_error = "run: command, config and out_dir are required";
            return MFG_ERR_INVALID_ARGUMENT;
        }
        std::optional<std::uint64_t> seed;
        if (seed_override) seed = *seed_override;
        const mfg::RunOutcome outcome =
            mfg::run_command(command, config_json, out_dir, seed, quiet != 0);
        if (run_dir_out) *run_dir_out = dup_string(outcome.run_dir);
        if (outcome.exit_code == 0) return MFG_OK;
        g_last_error = outcome.message;
        if (outcome.exit_code == 2) return MFG_ERR_INVALID_ARGUMENT;
        return MFG_ERR_NOT_CONVERGED;
    });
}

} // extern "C"
