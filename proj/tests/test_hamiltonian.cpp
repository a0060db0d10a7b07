#include <doctest.h>

#include "config.hpp"
#include "hamiltonian.hpp"

#include <cmath>
#include <random>

using namespace mfg;

namespace {
const DiscreteMeasure kDelta0 = DiscreteMeasure::dirac(Vec::Zero(1));

Vec scalar(double v) { return Vec::Constant(1, v); }
} // namespace

TEST_CASE("hamiltonian value by direct substitution") {
    // b = alpha, f = alpha^2/2: H = <alpha, y> + alpha^2/2 = 2 + 2 = 4.
    const MfgModel pure_control = build_lq_model(LqSpec::scalar(0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 1));
    CHECK(hamiltonian_value(pure_control, 0.1, scalar(0), kDelta0, scalar(1), scalar(2)) ==
          doctest::Approx(4.0));

    // alpha = 0 and zero running cost: H = <b1 x, y>.
    const MfgModel drift_only = build_lq_model(LqSpec::scalar(0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1));
    CHECK(hamiltonian_value(drift_only, 0.0, scalar(1), kDelta0, scalar(1), scalar(0)) ==
          doctest::Approx(1.0));

    // b1 = b2 = 1, f = (x^2 + alpha^2)/2 at x=1, y=1, alpha=-1: H = 0 + 1 = 1.
    const MfgModel full = build_lq_model(LqSpec::scalar(0, 0, 1, 0, 1, 0, 1, 1, 1, 0, 1));
    CHECK(hamiltonian_value(full, 0.0, scalar(1), kDelta0, scalar(1), scalar(-1)) ==
          doctest::Approx(1.0));

    CHECK_THROWS_AS(hamiltonian_value(full, 0.0, Vec::Zero(2), kDelta0, scalar(1), scalar(0)),
                    InvalidArgument);
}

TEST_CASE("closed-form LQ minimizer") {
    const MfgModel model = build_lq_model(LqSpec::scalar(1, 0, 1, 0, 1, 0, 0, 1, 1, 0, 1));
    CHECK(minimize_hamiltonian(model, 0.2, scalar(0.7), kDelta0, scalar(2))[0] ==
          doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(minimize_hamiltonian(model, 0.2, scalar(0.7), kDelta0, scalar(0))[0] ==
          doctest::Approx(0.0));
}

TEST_CASE("quartic control cost against a bisection oracle") {
    // f(alpha) = alpha^2/2 + 0.1 alpha^4, b2 = 1, y = 1: the minimizer is
    // the unique real root of alpha + 0.4 alpha^3 = -1.
    const MfgModel model = build_quartic_control_model(1, 0, 0, 1, 1, 0, 1, 0.1);
    auto stationarity = [](double a) { return a + 0.4 * a * a * a + 1.0; };
    double lo = -2.0, hi = 0.0;
    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        (stationarity(mid) < 0.0 ? lo : hi) = mid;
    }
    const double oracle_root = 0.5 * (lo + hi);

    // Cross-check the bracketing oracle with a dense grid scan.
    double best = -3.0, best_val = 1e300;
    for (int i = 0; i <= 600000; ++i) {
        const double a = -3.0 + i * 1e-5;
        const double h = a * 1.0 + 0.5 * a * a + 0.1 * a * a * a * a;
        if (h < best_val) {
            best_val = h;
            best = a;
        }
    }
    CHECK(std::abs(best - oracle_root) < 2e-5);

    const Vec alpha = minimize_hamiltonian(model, 0.0, scalar(0), kDelta0, scalar(1));
    CHECK(alpha[0] == doctest::Approx(oracle_root).epsilon(1e-9));
}

TEST_CASE("stationarity and the convexity bound at random draws") {
    const MfgModel lq = build_lq_model(LqSpec::scalar(1, 0.5, 1, 0.5, 1, 0, 0.3, 1.2, 1, 1, 1));
    const MfgModel quartic = build_quartic_control_model(1, 1, 0.2, 0.8, 1, 1, 1, 0.15);
    std::mt19937 gen(11);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::uniform_real_distribution<double> ut(0.0, 1.0);

    for (const MfgModel* model : {&lq, &quartic}) {
        for (int s = 0; s < 1000; ++s) {
            const double t = ut(gen);
            const Vec x = scalar(normal(gen));
            const Vec y = scalar(normal(gen));
            const DiscreteMeasure mu = DiscreteMeasure::dirac(scalar(normal(gen)));
            const Vec a = minimize_hamiltonian(*model, t, x, mu, y);
            const double grad =
                (model->b2(t).transpose() * y + model->df_dalpha(t, x, mu, a)).norm();
            CHECK(grad <= 1e-8);
            const double bound = (model->df_dalpha(t, x, mu, Vec::Zero(1)).norm() +
                                  model->b2(t).norm() * y.norm()) /
                                 model->lambda;
            CHECK(a.norm() <= bound + 1e-9);
        }
    }
}

TEST_CASE("LQ minimizer is Lipschitz in (x, y) with the explicit constant") {
    const LqSpec spec = LqSpec::scalar(1, 0, 1, 0.5, 1.3, 0, 0.3, 0.9, 1, 1, 1);
    const MfgModel model = build_lq_model(spec);
    // alpha = -(n'n)^{-1} b2' y: no x dependence, slope |b2| / n^2.
    const double lip = 0.9 / (1.3 * 1.3);
    std::mt19937 gen(4);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int s = 0; s < 300; ++s) {
        const Vec x1 = scalar(normal(gen)), x2 = scalar(normal(gen));
        const Vec y1 = scalar(normal(gen)), y2 = scalar(normal(gen));
        const Vec a1 = minimize_hamiltonian(model, 0.5, x1, kDelta0, y1);
        const Vec a2 = minimize_hamiltonian(model, 0.5, x2, kDelta0, y2);
        CHECK((a1 - a2).norm() <=
              lip * ((x1 - x2).norm() + (y1 - y2).norm()) + 1e-12);
    }
}

TEST_CASE("returned point minimizes against random perturbations") {
    const MfgModel model = build_quartic_control_model(1, 1, 0, 1, 1, 0, 1, 0.1);
    std::mt19937 gen(8);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < 10; ++s) {
        const Vec x = scalar(normal(gen));
        const Vec y = scalar(2.0 * normal(gen));
        const Vec a = minimize_hamiltonian(model, 0.3, x, kDelta0, y);
        const double h0 = hamiltonian_value(model, 0.3, x, kDelta0, y, a);
        for (int p = 0; p < 100; ++p) {
            const Vec d = scalar(normal(gen));
            CHECK(h0 <= hamiltonian_value(model, 0.3, x, kDelta0, y, a + d) + 1e-12);
        }
    }
}
