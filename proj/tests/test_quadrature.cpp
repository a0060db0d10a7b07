#include <doctest.h>

#include "quadrature.hpp"

#include <cmath>

using namespace mfg;

namespace {
double moment(const GaussHermite& q, int p) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], p);
    return s;
}
} // namespace

TEST_CASE("order-8 rule integrates Gaussian moments up to degree 15 exactly") {
    const GaussHermite q(8);
    double wsum = 0.0;
    for (double w : q.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));

    // E[xi^{2k}] = (2k-1)!!, odd moments vanish (checked against the scale
    // of the integrand, |xi|^p).
    const double expected[] = {1, 0, 1, 0, 3, 0, 15, 0, 105, 0, 945, 0, 10395, 0, 135135, 0};
    for (int p = 0; p <= 15; ++p) {
        if (p % 2 == 0) {
            CHECK(moment(q, p) == doctest::Approx(expected[p]).epsilon(1e-10));
        } else {
            double scale = 0.0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i)
                scale += q.weights[i] * std::pow(std::abs(q.nodes[i]), p);
            CHECK(std::abs(moment(q, p)) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("degree-16 moment is no longer exact") {
    const GaussHermite q(8);
    CHECK(std::abs(moment(q, 16) - 2027025.0) > 1.0);
}

TEST_CASE("tensor rule in two dimensions") {
    const GaussHermiteTensor q(8, 2);
    CHECK(q.nodes.size() == 64);
    double wsum = 0.0, xx = 0.0, xy = 0.0, x2y2 = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        wsum += q.weights[i];
        xx += q.weights[i] * q.nodes[i][0] * q.nodes[i][0];
        xy += q.weights[i] * q.nodes[i][0] * q.nodes[i][1];
        x2y2 += q.weights[i] * q.nodes[i][0] * q.nodes[i][0] * q.nodes[i][1] * q.nodes[i][1];
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(xx == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(xy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(x2y2 == doctest::Approx(1.0).epsilon(1e-12));
}
