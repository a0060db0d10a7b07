#include "hamiltonian.hpp"

#include <cmath>

namespace mfg {

double hamiltonian_value(const MfgModel& model, double t, const Vec& x, const DiscreteMeasure& mu,
                         const Vec& y, const Vec& alpha) {
    model.check_dimensions(x, alpha);
    if (y.size() != model.d) throw InvalidArgument("adjoint has wrong dimension");
    return model.drift(t, x, mu, alpha).dot(y) + model.f(t, x, mu, alpha);
}

namespace {

Vec hamiltonian_gradient(const MfgModel& model, double t, const Vec& x, const DiscreteMeasure& mu,
                         const Vec& y, const Vec& alpha, const Mat& b2t) {
    return b2t.transpose() * y + model.df_dalpha(t, x, mu, alpha);
}

} // namespace

Vec minimize_hamiltonian(const MfgModel& model, double t, const Vec& x, const DiscreteMeasure& mu,
                         const Vec& y, const MinimizeOptions& opts) {
    if (y.size() != model.d) throw InvalidArgument("adjoint has wrong dimension");
    const Mat b2t = model.b2(t);

    Vec alpha;
    if (model.lq) {
        // LQ running cost has no x-alpha or mean-alpha coupling, so the
        // stationarity equation n'n alpha + b2' y = 0 is explicit.
        const Mat& n = model.lq->n.at(t);
        alpha = -(n.transpose() * n).ldlt().solve(b2t.transpose() * y);
    } else {
        alpha = Vec::Zero(model.k);
        Vec grad = hamiltonian_gradient(model, t, x, mu, y, alpha, b2t);
        double value = hamiltonian_value(model, t, x, mu, y, alpha);
        int iter = 0;
        while (grad.norm() > opts.gradient_tol) {
            if (iter++ >= opts.max_iters)
                throw SolverError("Hamiltonian minimization budget exhausted", grad.norm(), iter);

            // Finite-difference Jacobian of df_dalpha (the control Hessian).
            Mat hess(model.k, model.k);
            const double h = 1e-6 * std::max(1.0, alpha.norm());
            for (int j = 0; j < model.k; ++j) {
                Vec ap = alpha, am = alpha;
                ap[j] += h;
                am[j] -= h;
                hess.col(j) = (model.df_dalpha(t, x, mu, ap) - model.df_dalpha(t, x, mu, am)) / (2 * h);
            }
            Vec step = -Eigen::FullPivLU<Mat>(hess).solve(grad);
            if (!step.allFinite() || step.dot(grad) >= 0.0)
                step = -grad / (2.0 * model.lambda); // gradient fallback

            // Step halving; a step is accepted when it decreases either the
            // value or the gradient norm (near the optimum value changes
            // drop below machine precision before the gradient does).
            double scale = 1.0;
            bool accepted = false;
            while (scale > 1e-12) {
                const Vec candidate = alpha + scale * step;
                const double cv = hamiltonian_value(model, t, x, mu, y, candidate);
                const Vec cg = hamiltonian_gradient(model, t, x, mu, y, candidate, b2t);
                if (cv < value || cg.norm() < grad.norm()) {
                    alpha = candidate;
                    value = cv;
                    grad = cg;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if (!accepted)
                throw SolverError("Hamiltonian minimization stalled", grad.norm(), iter);
        }
    }

    // A-priori bound from strong convexity; a violation means the declared
    // lambda does not hold for this model.
    const double bound =
        (model.df_dalpha(t, x, mu, Vec::Zero(model.k)).norm() + b2t.norm() * y.norm()) /
        model.lambda;
    if (alpha.norm() > bound * (1.0 + 1e-9) + 1e-12)
        throw AssumptionViolation("Hamiltonian minimizer violates the convexity bound");
    return alpha;
}

} // namespace mfg
