#pragma once

#include "measure.hpp"
#include "types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mfg {

enum class MeasureDependence { none, mean_only, full };

// Matrix-valued function of time, piecewise constant on [0, T):
// value(t) = values[i] on [breakpoints[i], breakpoints[i+1]).
struct PiecewiseConstMat {
    std::vector<double> breakpoints; // first entry 0
    std::vector<Mat> values;

    PiecewiseConstMat() = default;
    explicit PiecewiseConstMat(Mat constant) : breakpoints{0.0}, values{std::move(constant)} {}
    static PiecewiseConstMat scalar(double v) { return PiecewiseConstMat(Mat::Constant(1, 1, v)); }

    const Mat& at(double t) const;
    bool constant() const { return values.size() == 1; }
};

// Linear-quadratic game data (Remark-style specialization):
//   drift      b0(t) mean(mu) + b1(t) x + b2(t) alpha
//   running    1/2 |m(t) x + mbar(t) mean(mu)|^2 + 1/2 |n(t) alpha|^2
//   terminal   1/2 |q x + qbar mean(mu)|^2
struct LqSpec {
    double T = 1.0;
    int d = 1, k = 1, m_noise = 1;
    Vec x0;
    Mat sigma;
    PiecewiseConstMat b0, b1, b2; // d x d, d x d, d x k
    PiecewiseConstMat m, mbar;    // d x d
    PiecewiseConstMat n;          // k x k
    Mat q, qbar;                  // d x d

    // Scalar convenience constructor (d = k = m = 1).
    static LqSpec scalar(double q, double qbar, double m, double mbar, double n, double b0,
                         double b1, double b2, double sigma, double x0, double T);

    void check_dimensions() const;
};

struct AssumptionCheck {
    std::string name;
    bool passed = true;
    bool solver_blocking = false;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_passed() const;
    bool solver_blocked() const;
    std::string summary() const;
};

// One mean-field game instance. Coefficient callables must be pure;
// instances are immutable after construction and safe to share across
// threads.
struct MfgModel {
    double T = 1.0;
    int d = 1, k = 1, m = 1;
    Vec x0;
    Mat sigma;
    MeasureDependence measure_dep = MeasureDependence::full;

    std::function<Vec(double, const DiscreteMeasure&)> b0;
    std::function<Mat(double)> b1;
    std::function<Mat(double)> b2;

    std::function<double(double, const Vec&, const DiscreteMeasure&, const Vec&)> f;
    std::function<Vec(double, const Vec&, const DiscreteMeasure&, const Vec&)> df_dx;
    std::function<Vec(double, const Vec&, const DiscreteMeasure&, const Vec&)> df_dalpha;
    std::function<double(const Vec&, const DiscreteMeasure&)> g;
    std::function<Vec(const Vec&, const DiscreteMeasure&)> dg_dx;

    double lambda = 0.0;
    double c_L = 1.0;

    // Present when the model was built from an LqSpec; enables the
    // closed-form Hamiltonian minimizer and the analytic oracle.
    std::shared_ptr<const LqSpec> lq;

    // Full drift b(t, x, mu, alpha).
    Vec drift(double t, const Vec& x, const DiscreteMeasure& mu, const Vec& alpha) const;

    void check_dimensions(const Vec& x, const Vec& alpha) const;
};

// Builds the general-model interface from LQ data. lambda is derived from
// n(t) (half the smallest eigenvalue of n'n over the sampled lattice).
// Throws AssumptionViolation when n(t)'n(t) is singular.
MfgModel build_lq_model(const LqSpec& spec);

// Report-only screening of the standing assumptions on a sampled time
// lattice; a failed strict-convexity check is marked solver-blocking.
AssumptionReport check_lq_assumptions(const LqSpec& spec, int lattice_points = 64);

// Sampled checks for arbitrary models: coefficient bounds, gradient
// consistency against central differences, and the alpha-convexity
// surrogate with the model's lambda.
AssumptionReport validate_model(const MfgModel& model, int samples, std::uint64_t seed);

} // namespace mfg
