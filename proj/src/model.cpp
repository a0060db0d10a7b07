#include "model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace mfg {

const Mat& PiecewiseConstMat::at(double t) const {
    if (values.empty()) throw InvalidArgument("piecewise-constant coefficient has no values");
    std::size_t i = 0;
    while (i + 1 < breakpoints.size() && t >= breakpoints[i + 1]) ++i;
    return values[i];
}

LqSpec LqSpec::scalar(double q, double qbar, double m, double mbar, double n, double b0, double b1,
                      double b2, double sigma, double x0, double T) {
    LqSpec s;
    s.T = T;
    s.x0 = Vec::Constant(1, x0);
    s.sigma = Mat::Constant(1, 1, sigma);
    s.b0 = PiecewiseConstMat::scalar(b0);
    s.b1 = PiecewiseConstMat::scalar(b1);
    s.b2 = PiecewiseConstMat::scalar(b2);
    s.m = PiecewiseConstMat::scalar(m);
    s.mbar = PiecewiseConstMat::scalar(mbar);
    s.n = PiecewiseConstMat::scalar(n);
    s.q = Mat::Constant(1, 1, q);
    s.qbar = Mat::Constant(1, 1, qbar);
    return s;
}

void LqSpec::check_dimensions() const {
    auto expect = [](const PiecewiseConstMat& c, int rows, int cols, const char* name) {
        if (c.values.empty()) throw InvalidArgument(std::string(name) + " has no values");
        if (c.breakpoints.size() != c.values.size())
            throw InvalidArgument(std::string(name) + ": breakpoints/values length mismatch");
        if (!c.breakpoints.empty() && c.breakpoints.front() != 0.0)
            throw InvalidArgument(std::string(name) + ": first breakpoint must be 0");
        for (std::size_t i = 1; i < c.breakpoints.size(); ++i)
            if (c.breakpoints[i] <= c.breakpoints[i - 1])
                throw InvalidArgument(std::string(name) + ": breakpoints must be increasing");
        for (const Mat& v : c.values)
            if (v.rows() != rows || v.cols() != cols)
                throw InvalidArgument(std::string(name) + ": wrong shape");
    };
    if (!(T > 0.0)) throw InvalidArgument("T must be positive");
    if (d < 1 || k < 1 || m_noise < 1) throw InvalidArgument("dimensions must be >= 1");
    if (x0.size() != d) throw InvalidArgument("x0 has wrong length");
    if (sigma.rows() != d || sigma.cols() != m_noise) throw InvalidArgument("sigma has wrong shape");
    expect(b0, d, d, "b0");
    expect(b1, d, d, "b1");
    expect(b2, d, k, "b2");
    expect(m, d, d, "m");
    expect(mbar, d, d, "mbar");
    expect(n, k, k, "n");
    if (q.rows() != d || q.cols() != d) throw InvalidArgument("q has wrong shape");
    if (qbar.rows() != d || qbar.cols() != d) throw InvalidArgument("qbar has wrong shape");
}

bool AssumptionReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

bool AssumptionReport::solver_blocked() const {
    for (const auto& c : checks)
        if (!c.passed && c.solver_blocking) return true;
    return false;
}

std::string AssumptionReport::summary() const {
    std::ostringstream out;
    for (const auto& c : checks)
        out << (c.passed ? "pass" : (c.solver_blocking ? "FAIL (solver-blocking)" : "FAIL"))
            << "  " << c.name << (c.detail.empty() ? "" : "  [" + c.detail + "]") << '\n';
    return out.str();
}

Vec MfgModel::drift(double t, const Vec& x, const DiscreteMeasure& mu, const Vec& alpha) const {
    return b0(t, mu) + b1(t) * x + b2(t) * alpha;
}

void MfgModel::check_dimensions(const Vec& x, const Vec& alpha) const {
    if (x.size() != d) throw InvalidArgument("state has wrong dimension");
    if (alpha.size() != k) throw InvalidArgument("control has wrong dimension");
}

namespace {

double min_symmetric_eigenvalue(const Mat& s) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (s + s.transpose()));
    return eig.eigenvalues().minCoeff();
}

std::vector<double> sample_lattice(double T, int points) {
    std::vector<double> ts(points);
    for (int i = 0; i < points; ++i) ts[i] = T * i / (points - 1);
    return ts;
}

} // namespace

MfgModel build_lq_model(const LqSpec& spec_in) {
    spec_in.check_dimensions();
    auto spec = std::make_shared<const LqSpec>(spec_in);

    // lambda = half the worst-case strong convexity of 1/2|n(t) alpha|^2.
    double min_nn = std::numeric_limits<double>::infinity();
    for (double t : sample_lattice(spec->T, 65)) {
        const Mat& n = spec->n.at(t);
        min_nn = std::min(min_nn, min_symmetric_eigenvalue(n.transpose() * n));
    }
    if (!(min_nn > 0.0))
        throw AssumptionViolation(
            "n(t)'n(t) is singular on the sampled lattice: running cost is not strictly convex "
            "in the control");

    MfgModel model;
    model.T = spec->T;
    model.d = spec->d;
    model.k = spec->k;
    model.m = spec->m_noise;
    model.x0 = spec->x0;
    model.sigma = spec->sigma;
    model.lambda = 0.5 * min_nn;
    model.lq = spec;

    bool uses_mean = !spec->qbar.isZero(0.0);
    for (const Mat& v : spec->mbar.values) uses_mean = uses_mean || !v.isZero(0.0);
    for (const Mat& v : spec->b0.values) uses_mean = uses_mean || !v.isZero(0.0);
    model.measure_dep = uses_mean ? MeasureDependence::mean_only : MeasureDependence::none;

    model.b0 = [spec](double t, const DiscreteMeasure& mu) -> Vec {
        return spec->b0.at(t) * mu.mean();
    };
    model.b1 = [spec](double t) -> Mat { return spec->b1.at(t); };
    model.b2 = [spec](double t) -> Mat { return spec->b2.at(t); };

    model.f = [spec](double t, const Vec& x, const DiscreteMeasure& mu, const Vec& alpha) {
        const Vec u = spec->m.at(t) * x + spec->mbar.at(t) * mu.mean();
        const Vec v = spec->n.at(t) * alpha;
        return 0.5 * u.squaredNorm() + 0.5 * v.squaredNorm();
    };
    model.df_dx = [spec](double t, const Vec& x, const DiscreteMeasure& mu, const Vec&) -> Vec {
        const Mat& m = spec->m.at(t);
        return m.transpose() * (m * x + spec->mbar.at(t) * mu.mean());
    };
    model.df_dalpha = [spec](double t, const Vec&, const DiscreteMeasure&, const Vec& alpha) -> Vec {
        const Mat& n = spec->n.at(t);
        return n.transpose() * (n * alpha);
    };
    model.g = [spec](const Vec& x, const DiscreteMeasure& mu) {
        return 0.5 * (spec->q * x + spec->qbar * mu.mean()).squaredNorm();
    };
    model.dg_dx = [spec](const Vec& x, const DiscreteMeasure& mu) -> Vec {
        return spec->q.transpose() * (spec->q * x + spec->qbar * mu.mean());
    };

    // c_L upper-bounds the sampled coefficient norms and the cost
    // gradient Lipschitz constants.
    double c = 1.0;
    for (double t : sample_lattice(spec->T, 65)) {
        const double bsum = spec->b0.at(t).norm() + spec->b1.at(t).norm() + spec->b2.at(t).norm();
        const Mat& m = spec->m.at(t);
        const Mat& n = spec->n.at(t);
        c = std::max({c, bsum, (m.transpose() * m).norm(), (m.transpose() * spec->mbar.at(t)).norm(),
                      (n.transpose() * n).norm()});
    }
    c = std::max({c, (spec->q.transpose() * spec->q).norm(),
                  (spec->q.transpose() * spec->qbar).norm()});
    model.c_L = c;
    return model;
}

AssumptionReport check_lq_assumptions(const LqSpec& spec, int lattice_points) {
    spec.check_dimensions();
    AssumptionReport report;
    const auto ts = sample_lattice(spec.T, lattice_points);
    auto fmt = [](double v) {
        std::ostringstream o;
        o << v;
        return o.str();
    };

    {
        const double ev = min_symmetric_eigenvalue(spec.qbar.transpose() * spec.q);
        report.checks.push_back({"(A.7) terminal mean-reversion: qbar'q >= 0", ev >= -1e-12, false,
                                 "min eig sym part = " + fmt(ev)});
    }
    {
        double worst = std::numeric_limits<double>::infinity();
        for (double t : ts)
            worst = std::min(worst,
                             min_symmetric_eigenvalue(spec.mbar.at(t).transpose() * spec.m.at(t)));
        report.checks.push_back({"(A.7) running mean-reversion: mbar(t)'m(t) >= 0", worst >= -1e-12,
                                 false, "min eig sym part = " + fmt(worst)});
    }
    {
        double worst = std::numeric_limits<double>::infinity();
        for (double t : ts)
            worst = std::min(worst, min_symmetric_eigenvalue(spec.n.at(t).transpose() * spec.n.at(t)));
        report.checks.push_back({"strict control convexity: n(t)'n(t) > 0", worst > 1e-12, true,
                                 "min eig = " + fmt(worst)});
    }
    {
        double sup = 0.0;
        for (double t : ts)
            sup = std::max(sup, spec.b0.at(t).norm() + spec.b1.at(t).norm() + spec.b2.at(t).norm());
        report.checks.push_back({"(A.5) drift coefficients bounded", std::isfinite(sup), false,
                                 "sup_t (|b0|+|b1|+|b2|) = " + fmt(sup)});
    }
    {
        // Detectable strong convexity in x (existence-proof constant; recorded,
        // drives no algorithm).
        double gamma = std::numeric_limits<double>::infinity();
        for (double t : ts)
            gamma = std::min(gamma, min_symmetric_eigenvalue(spec.m.at(t).transpose() * spec.m.at(t)));
        report.checks.push_back({"x-convexity constant (informational)", true, false,
                                 "min eig m'm = " + fmt(0.5 * gamma)});
    }
    return report;
}

namespace {

DiscreteMeasure random_measure(int d, const rng::Stream& stream, std::uint64_t id) {
    const int atoms = 3;
    std::vector<double> pts(static_cast<std::size_t>(atoms) * d);
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = 2.0 * stream.normal(id, 100 + i);
    return DiscreteMeasure::uniform(d, std::move(pts));
}

Vec random_vec(int n, const rng::Stream& stream, std::uint64_t id, std::uint64_t tag, double scale) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * stream.normal(id, tag + i);
    return v;
}

} // namespace

AssumptionReport validate_model(const MfgModel& model, int samples, std::uint64_t seed) {
    AssumptionReport report;
    const rng::Stream stream(seed, "model_validation");
    auto fmt = [](double v) {
        std::ostringstream o;
        o << v;
        return o.str();
    };

    {
        bool ok = model.T > 0.0 && model.d >= 1 && model.k >= 1 && model.m >= 1 &&
                  model.lambda > 0.0 && model.c_L > 0.0;
        report.checks.push_back({"constants: T > 0, dims >= 1, lambda > 0, c_L > 0", ok, true, ""});
    }
    {
        const DiscreteMeasure delta0 = DiscreteMeasure::dirac(Vec::Zero(model.d));
        double supb = 0.0, supb0 = 0.0;
        for (double t : sample_lattice(model.T, 33)) {
            supb = std::max(supb, model.b1(t).norm() + model.b2(t).norm());
            supb0 = std::max(supb0, model.b0(t, delta0).norm());
        }
        const bool ok = supb <= model.c_L + 1e-9 && supb0 <= model.c_L + 1e-9;
        report.checks.push_back({"(A.5) sampled coefficient bounds within c_L", ok, false,
                                 "sup(|b1|+|b2|) = " + fmt(supb) + ", sup|b0(t,delta_0)| = " + fmt(supb0)});
    }

    // Central-difference consistency of the supplied gradients.
    double worst_grad = 0.0;
    const double h = 1e-5;
    for (int s = 0; s < samples; ++s) {
        const double t = model.T * stream.uniform(s, 0);
        const DiscreteMeasure mu = random_measure(model.d, stream, s);
        const Vec x = random_vec(model.d, stream, s, 200, 2.0);
        const Vec alpha = random_vec(model.k, stream, s, 300, 2.0);

        const Vec gx = model.df_dx(t, x, mu, alpha);
        const Vec ga = model.df_dalpha(t, x, mu, alpha);
        const Vec gg = model.dg_dx(x, mu);
        for (int i = 0; i < model.d; ++i) {
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd = (model.f(t, xp, mu, alpha) - model.f(t, xm, mu, alpha)) / (2 * h);
            worst_grad = std::max(worst_grad, std::abs(fd - gx[i]) / std::max(1.0, std::abs(gx[i])));
            const double gd = (model.g(xp, mu) - model.g(xm, mu)) / (2 * h);
            worst_grad = std::max(worst_grad, std::abs(gd - gg[i]) / std::max(1.0, std::abs(gg[i])));
        }
        for (int i = 0; i < model.k; ++i) {
            Vec ap = alpha, am = alpha;
            ap[i] += h;
            am[i] -= h;
            const double fd = (model.f(t, x, mu, ap) - model.f(t, x, mu, am)) / (2 * h);
            worst_grad = std::max(worst_grad, std::abs(fd - ga[i]) / std::max(1.0, std::abs(ga[i])));
        }
    }
    report.checks.push_back({"gradient consistency vs central differences (rel 1e-5)",
                             worst_grad <= 1e-5, true, "worst rel error = " + fmt(worst_grad)});

    // Sampled alpha-convexity surrogate with the model's lambda.
    double worst_gap = std::numeric_limits<double>::infinity();
    bool convex_ok = true;
    for (int s = 0; s < samples; ++s) {
        const double t = model.T * stream.uniform(s, 1000);
        const DiscreteMeasure mu = random_measure(model.d, stream, 7919 + s);
        const Vec x = random_vec(model.d, stream, s, 1200, 2.0);
        const Vec a0 = random_vec(model.k, stream, s, 1300, 2.0);
        const Vec a1 = random_vec(model.k, stream, s, 1400, 2.0);
        const double lhs = model.f(t, x, mu, a1) - model.f(t, x, mu, a0) -
                           (a1 - a0).dot(model.df_dalpha(t, x, mu, a0));
        const double rhs = model.lambda * (a1 - a0).squaredNorm();
        worst_gap = std::min(worst_gap, lhs - rhs);
        if (lhs < rhs - 1e-9) convex_ok = false;
    }
    report.checks.push_back({"alpha-convexity surrogate with model lambda", convex_ok, true,
                             "worst margin = " + fmt(worst_gap)});
    return report;
}

} // namespace mfg
