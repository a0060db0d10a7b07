#include "lq_oracle.hpp"

#include "wasserstein.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace mfg {

namespace {

Mat control_gain(const LqSpec& spec, double t) {
    const Mat& n = spec.n.at(t);
    const Mat& b2 = spec.b2.at(t);
    return b2 * (n.transpose() * n).ldlt().solve(b2.transpose()); // K = b2 (n'n)^{-1} b2'
}

Mat riccati_rhs(const LqSpec& spec, double t, const Mat& eta) {
    const Mat& b1 = spec.b1.at(t);
    const Mat& m = spec.m.at(t);
    return -b1.transpose() * eta - eta * b1 + eta * control_gain(spec, t) * eta -
           m.transpose() * m;
}

// Coupled linear system for v = [xbar; chi]:
//   xbar' = (b0 + b1 - K eta) xbar - K chi
//   chi'  = -(eta b0 + m' mbar) xbar + (eta K - b1') chi
Mat coupled_matrix(const LqSpec& spec, double t, const Mat& eta) {
    const int d = spec.d;
    const Mat K = control_gain(spec, t);
    Mat M(2 * d, 2 * d);
    M.topLeftCorner(d, d) = spec.b0.at(t) + spec.b1.at(t) - K * eta;
    M.topRightCorner(d, d) = -K;
    M.bottomLeftCorner(d, d) = -(eta * spec.b0.at(t) + spec.m.at(t).transpose() * spec.mbar.at(t));
    M.bottomRightCorner(d, d) = eta * K - spec.b1.at(t).transpose();
    return M;
}

} // namespace

RiccatiSolution solve_lq_riccati(const LqSpec& spec, const TimeGrid& grid) {
    spec.check_dimensions();
    if (std::abs(grid.horizon - spec.T) > 1e-12 * std::max(1.0, spec.T))
        throw InvalidArgument("grid horizon must match the spec horizon");
    {
        const auto report = check_lq_assumptions(spec);
        if (report.solver_blocked())
            throw AssumptionViolation("LQ spec fails strict control convexity:\n" + report.summary());
    }

    const int d = spec.d;
    const int n_coarse = grid.n_steps;
    const int n_quarter = 4 * n_coarse; // eta integrated on a 4x refined grid
    const double hq = grid.horizon / n_quarter;

    // Backward RK4 for eta on the quarter grid.
    std::vector<Mat> eta_q(n_quarter + 1);
    eta_q[n_quarter] = spec.q.transpose() * spec.q;
    for (int j = n_quarter; j > 0; --j) {
        const double t = j * hq;
        const Mat& e = eta_q[j];
        const Mat k1 = riccati_rhs(spec, t, e);
        const Mat k2 = riccati_rhs(spec, t - hq / 2, e - (hq / 2) * k1);
        const Mat k3 = riccati_rhs(spec, t - hq / 2, e - (hq / 2) * k2);
        const Mat k4 = riccati_rhs(spec, t - hq, e - hq * k3);
        eta_q[j - 1] = e - (hq / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }

    // Forward RK4 for the fundamental matrix on the half grid (step dt/2);
    // mid stages read eta at quarter nodes.
    const int n_half = 2 * n_coarse;
    const double hh = grid.horizon / n_half;
    std::vector<Mat> fundamental(n_half + 1);
    fundamental[0] = Mat::Identity(2 * d, 2 * d);
    for (int j = 0; j < n_half; ++j) {
        const double t = j * hh;
        const Mat M0 = coupled_matrix(spec, t, eta_q[2 * j]);
        const Mat Mm = coupled_matrix(spec, t + hh / 2, eta_q[2 * j + 1]);
        const Mat M1 = coupled_matrix(spec, t + hh, eta_q[2 * j + 2]);
        const Mat& P = fundamental[j];
        const Mat k1 = M0 * P;
        const Mat k2 = Mm * (P + (hh / 2) * k1);
        const Mat k3 = Mm * (P + (hh / 2) * k2);
        const Mat k4 = M1 * (P + hh * k3);
        fundamental[j + 1] = P + (hh / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }

    // Boundary condition chi_T = q' qbar xbar_T selects chi_0.
    const Mat& PT = fundamental[n_half];
    const Mat qq = spec.q.transpose() * spec.qbar;
    const Mat A = PT.bottomRightCorner(d, d) - qq * PT.topRightCorner(d, d);
    const Vec rhs = (qq * PT.topLeftCorner(d, d) - PT.bottomLeftCorner(d, d)) * spec.x0;
    Eigen::FullPivLU<Mat> lu(A);
    if (!lu.isInvertible())
        throw SolverError("LQ boundary system is singular (degenerate spec)", 0.0, 0);
    const Vec chi0 = lu.solve(rhs);

    Vec v0(2 * d);
    v0.head(d) = spec.x0;
    v0.tail(d) = chi0;

    RiccatiSolution sol;
    sol.grid = grid;
    sol.spec = std::make_shared<const LqSpec>(spec);
    sol.eta.resize(n_coarse + 1);
    sol.chi.resize(n_coarse + 1);
    sol.xbar.resize(n_coarse + 1);
    sol.eta_half.resize(n_half + 1);
    sol.chi_half.resize(n_half + 1);
    sol.xbar_half.resize(n_half + 1);
    for (int j = 0; j <= n_half; ++j) {
        const Vec v = fundamental[j] * v0;
        sol.eta_half[j] = eta_q[2 * j];
        sol.xbar_half[j] = v.head(d);
        sol.chi_half[j] = v.tail(d);
        if (j % 2 == 0) {
            sol.eta[j / 2] = sol.eta_half[j];
            sol.xbar[j / 2] = sol.xbar_half[j];
            sol.chi[j / 2] = sol.chi_half[j];
        }
    }

    // State covariance along the equilibrium: Sigma' = A Sigma + Sigma A' + sigma sigma'.
    const Mat noise = spec.sigma * spec.sigma.transpose();
    auto cov_rhs = [&](double t, const Mat& eta, const Mat& S) -> Mat {
        const Mat A = spec.b1.at(t) - control_gain(spec, t) * eta;
        return A * S + S * A.transpose() + noise;
    };
    std::vector<Mat> cov_half(n_half + 1);
    cov_half[0] = Mat::Zero(d, d);
    for (int j = 0; j < n_half; ++j) {
        const double t = j * hh;
        const Mat& S = cov_half[j];
        const Mat k1 = cov_rhs(t, eta_q[2 * j], S);
        const Mat k2 = cov_rhs(t + hh / 2, eta_q[2 * j + 1], S + (hh / 2) * k1);
        const Mat k3 = cov_rhs(t + hh / 2, eta_q[2 * j + 1], S + (hh / 2) * k2);
        const Mat k4 = cov_rhs(t + hh, eta_q[2 * j + 2], S + hh * k3);
        cov_half[j + 1] = S + (hh / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    sol.cov.resize(n_coarse + 1);
    for (int j = 0; j <= n_coarse; ++j) sol.cov[j] = cov_half[2 * j];

    sol.cost = lq_cost(sol, spec);
    return sol;
}

double lq_cost(const RiccatiSolution& sol, const LqSpec& spec) {
    const int n_half = static_cast<int>(sol.eta_half.size()) - 1;
    const double hh = sol.grid.horizon / n_half;
    const Vec& xT = sol.xbar_half.back();

    auto integrand = [&](int j) {
        const double t = j * hh;
        const Vec& xb = sol.xbar_half[j];
        const Vec& ch = sol.chi_half[j];
        const Mat K = control_gain(spec, t);
        const double drift_term = (spec.b0.at(t) * xb).dot(ch);
        const double control_term = -0.5 * ch.dot(K * ch);
        const double mean_cost = 0.5 * (spec.mbar.at(t) * xb).squaredNorm();
        const double noise = 0.5 * (spec.sigma.transpose() * sol.eta_half[j] * spec.sigma).trace();
        return drift_term + control_term + mean_cost + noise;
    };
    // Composite Simpson over the half grid (even interval count).
    double integral = integrand(0) + integrand(n_half);
    for (int j = 1; j < n_half; ++j) integral += (j % 2 ? 4.0 : 2.0) * integrand(j);
    integral *= hh / 3.0;

    return 0.5 * spec.x0.dot(sol.eta_half.front() * spec.x0) + sol.chi_half.front().dot(spec.x0) +
           0.5 * (spec.qbar * xT).squaredNorm() + integral;
}

Vec RiccatiSolution::field_at(double t, const Vec& x) const {
    const double dt = grid.dt();
    const double s = std::clamp(t / dt, 0.0, static_cast<double>(grid.n_steps));
    const int j = std::min(static_cast<int>(s), grid.n_steps - 1);
    const double w = s - j;
    const Mat e = (1.0 - w) * eta[j] + w * eta[j + 1];
    const Vec c = (1.0 - w) * chi[j] + w * chi[j + 1];
    return e * x + c;
}

Vec RiccatiSolution::alpha_feedback(double t, const Vec& x) const {
    const Mat& n = spec->n.at(t);
    const Mat& b2 = spec->b2.at(t);
    return -(n.transpose() * n).ldlt().solve(b2.transpose() * field_at(t, x));
}

MeasureFlow RiccatiSolution::equilibrium_flow(int support_size) const {
    if (spec->d != 1)
        throw InvalidArgument("equilibrium_flow quantile discretization requires d = 1");
    MeasureFlow flow;
    flow.grid = grid;
    flow.measures.reserve(grid.n_nodes());
    for (int j = 0; j < grid.n_nodes(); ++j) {
        const double mean = xbar[j][0];
        const double sd = std::sqrt(std::max(0.0, cov[j](0, 0)));
        if (sd == 0.0) {
            flow.measures.push_back(DiscreteMeasure::dirac(Vec::Constant(1, mean)));
            continue;
        }
        std::vector<double> pts(support_size);
        for (int i = 0; i < support_size; ++i)
            pts[i] = mean + sd * normal_quantile((i + 0.5) / support_size);
        flow.measures.push_back(DiscreteMeasure::uniform(1, std::move(pts)));
    }
    return flow;
}

} // namespace mfg
