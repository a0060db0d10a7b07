#include <doctest.h>

#include "model.hpp"

#include <cmath>
#include <random>

using namespace mfg;

namespace {
LqSpec acceptance_spec() {
    return LqSpec::scalar(/*q*/ 1, /*qbar*/ 0.5, /*m*/ 1, /*mbar*/ 0.5, /*n*/ 1, /*b0*/ 0,
                          /*b1*/ 0, /*b2*/ 1, /*sigma*/ 1, /*x0*/ 1, /*T*/ 1);
}
} // namespace

TEST_CASE("LQ model evaluates the quadratic costs") {
    const MfgModel model = build_lq_model(acceptance_spec());
    const DiscreteMeasure mu = DiscreteMeasure::dirac(Vec::Constant(1, 2.0));
    const Vec x = Vec::Constant(1, 1.0);
    const Vec a0 = Vec::Zero(1);

    // f(1, mean 2, alpha 0) = 1/2 (1 + 0.5*2)^2 = 2, and the same for g.
    CHECK(model.f(0.3, x, mu, a0) == doctest::Approx(2.0));
    CHECK(model.g(x, mu) == doctest::Approx(2.0));
    CHECK(model.dg_dx(x, mu)[0] == doctest::Approx(2.0));
    CHECK(model.lambda == doctest::Approx(0.5));
    CHECK(model.measure_dep == MeasureDependence::mean_only);
    CHECK(model.drift(0.0, x, mu, Vec::Constant(1, 3.0))[0] == doctest::Approx(3.0));
}

TEST_CASE("mean-free specs produce measure-independent coefficients") {
    const LqSpec spec = LqSpec::scalar(1, 0, 1, 0, 1, 0, 0, 1, 1, 1, 1);
    const MfgModel model = build_lq_model(spec);
    CHECK(model.measure_dep == MeasureDependence::none);
    const DiscreteMeasure a = DiscreteMeasure::dirac(Vec::Constant(1, -7.0));
    const DiscreteMeasure b = DiscreteMeasure::dirac(Vec::Constant(1, 11.0));
    const Vec x = Vec::Constant(1, 0.4);
    const Vec al = Vec::Constant(1, -0.2);
    CHECK(model.f(0.1, x, a, al) == model.f(0.1, x, b, al));
    CHECK(model.g(x, a) == model.g(x, b));
    CHECK(model.b0(0.1, a) == model.b0(0.1, b));
}

TEST_CASE("lambda comes from the worst n(t) over the lattice") {
    LqSpec spec = acceptance_spec();
    spec.n.breakpoints = {0.0, 0.5};
    spec.n.values = {Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0)};
    const MfgModel model = build_lq_model(spec);
    CHECK(model.lambda == doctest::Approx(0.5)); // min over t of n^2 / 2
}

TEST_CASE("singular control cost is rejected") {
    LqSpec spec = acceptance_spec();
    spec.n = PiecewiseConstMat::scalar(0.0);
    CHECK_THROWS_AS(build_lq_model(spec), AssumptionViolation);
}

TEST_CASE("assumption screening flags the mean-reversion sign") {
    {
        const auto report = check_lq_assumptions(acceptance_spec());
        CHECK(report.all_passed());
        CHECK(!report.solver_blocked());
    }
    {
        LqSpec bad = acceptance_spec();
        bad.qbar = Mat::Constant(1, 1, -2.0);
        const auto report = check_lq_assumptions(bad);
        CHECK(!report.all_passed());
        CHECK(!report.solver_blocked()); // advisory only
        bool flagged = false;
        for (const auto& c : report.checks)
            if (!c.passed) flagged = c.name.find("(A.7)") != std::string::npos;
        CHECK(flagged);
    }
    {
        LqSpec degenerate = acceptance_spec();
        degenerate.n = PiecewiseConstMat::scalar(0.0);
        const auto report = check_lq_assumptions(degenerate);
        CHECK(report.solver_blocked());
    }
}

TEST_CASE("sampled validation passes for LQ models") {
    const MfgModel model = build_lq_model(acceptance_spec());
    const auto report = validate_model(model, 100, 2024);
    CHECK(report.all_passed());
}

TEST_CASE("analytic gradients match central differences at 1000 random points") {
    LqSpec spec = acceptance_spec();
    spec.n.breakpoints = {0.0, 0.4};
    spec.n.values = {Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.5)};
    const MfgModel model = build_lq_model(spec);

    std::mt19937 gen(31);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    const double h = 1e-6;
    for (int s = 0; s < 1000; ++s) {
        const double t = ut(gen);
        const DiscreteMeasure mu = DiscreteMeasure::dirac(Vec::Constant(1, normal(gen)));
        const Vec x = Vec::Constant(1, normal(gen));
        const Vec a = Vec::Constant(1, normal(gen));
        Vec xp = x, xm = x, ap = a, am = a;
        xp[0] += h;
        xm[0] -= h;
        ap[0] += h;
        am[0] -= h;
        const double fdx = (model.f(t, xp, mu, a) - model.f(t, xm, mu, a)) / (2 * h);
        const double fda = (model.f(t, x, mu, ap) - model.f(t, x, mu, am)) / (2 * h);
        const double gdx = (model.g(xp, mu) - model.g(xm, mu)) / (2 * h);
        CHECK(std::abs(fdx - model.df_dx(t, x, mu, a)[0]) <=
              1e-6 * std::max(1.0, std::abs(fdx)));
        CHECK(std::abs(fda - model.df_dalpha(t, x, mu, a)[0]) <=
              1e-6 * std::max(1.0, std::abs(fda)));
        CHECK(std::abs(gdx - model.dg_dx(x, mu)[0]) <= 1e-6 * std::max(1.0, std::abs(gdx)));
    }
}

TEST_CASE("alpha-convexity surrogate holds with the derived lambda") {
    const MfgModel model = build_lq_model(acceptance_spec());
    std::mt19937 gen(77);
    std::normal_distribution<double> normal(0.0, 3.0);
    const DiscreteMeasure mu = DiscreteMeasure::dirac(Vec::Zero(1));
    for (int s = 0; s < 500; ++s) {
        const Vec x = Vec::Constant(1, normal(gen));
        const Vec a0 = Vec::Constant(1, normal(gen));
        const Vec a1 = Vec::Constant(1, normal(gen));
        const double gap = model.f(0.2, x, mu, a1) - model.f(0.2, x, mu, a0) -
                           (a1 - a0).dot(model.df_dalpha(0.2, x, mu, a0));
        CHECK(gap >= model.lambda * (a1 - a0).squaredNorm() - 1e-9);
    }
}

TEST_CASE("spec dimension validation") {
    LqSpec spec = acceptance_spec();
    spec.q = Mat::Zero(2, 2);
    CHECK_THROWS_AS(spec.check_dimensions(), InvalidArgument);
    LqSpec bad_T = acceptance_spec();
    bad_T.T = 0.0;
    CHECK_THROWS_AS(bad_T.check_dimensions(), InvalidArgument);
}
