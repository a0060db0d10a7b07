#include <doctest.h>

#include "measure.hpp"

#include <cmath>

using namespace mfg;

TEST_CASE("moments of simple supports") {
    CHECK(DiscreteMeasure::dirac(Vec::Constant(1, 3.0)).moment(2) == doctest::Approx(3.0));
    const DiscreteMeasure pm1 = DiscreteMeasure::uniform(1, {-1.0, 1.0});
    CHECK(pm1.moment(2) == doctest::Approx(1.0));
    const DiscreteMeasure z2 = DiscreteMeasure::uniform(1, {0.0, 2.0});
    CHECK(z2.moment(2) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(z2.moment(0), InvalidArgument);
}

TEST_CASE("weights are validated and normalized") {
    CHECK_THROWS_AS(DiscreteMeasure(1, {0.0}, {-1.0}), InvalidArgument);
    CHECK_THROWS_AS(DiscreteMeasure(1, {0.0, 1.0}, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(DiscreteMeasure(1, {std::nan("")}, {1.0}), InvalidArgument);
    const DiscreteMeasure mu(1, {0.0, 1.0}, {2.0, 6.0});
    CHECK(mu.weight(0) == doctest::Approx(0.25));
    CHECK(mu.weight(1) == doctest::Approx(0.75));
    CHECK(mu.mean()[0] == doctest::Approx(0.75));
}

TEST_CASE("mixture concatenates supports with scaled weights") {
    const DiscreteMeasure a = DiscreteMeasure::uniform(1, {0.0, 1.0});
    const DiscreteMeasure b = DiscreteMeasure::dirac(Vec::Constant(1, 5.0));
    const DiscreteMeasure m = mix(a, b, 0.25);
    CHECK(m.size() == 3);
    CHECK(m.weight(0) == doctest::Approx(0.375));
    CHECK(m.weight(2) == doctest::Approx(0.25));
    double mass = 0.0;
    for (int i = 0; i < m.size(); ++i) mass += m.weight(i);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("quantile thinning in d=1 is deterministic, stratified and mean-preserving") {
    const rng::Stream stream(7, "thin");
    const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {3.0, 1.0, 2.0, 4.0});
    const DiscreteMeasure t2 = thin(mu, 2, stream);
    CHECK(t2.size() == 2);
    CHECK(t2.points()[0] == doctest::Approx(1.5)); // conditional mean of the lower half
    CHECK(t2.points()[1] == doctest::Approx(3.5));
    CHECK(t2.mean()[0] == doctest::Approx(mu.mean()[0]).epsilon(1e-14));

    // Thinning a uniform-weight measure to its own size returns it sorted.
    const DiscreteMeasure t4 = thin(mu, 4, stream);
    CHECK(t4.points() == std::vector<double>{1.0, 2.0, 3.0, 4.0});

    // Atoms straddling stratum boundaries split proportionally.
    const DiscreteMeasure w(1, {0.0, 1.0}, {0.75, 0.25});
    const DiscreteMeasure t3 = thin(w, 3, stream);
    CHECK(t3.points()[0] == doctest::Approx(0.0));
    CHECK(t3.points()[1] == doctest::Approx(0.0));
    CHECK(t3.points()[2] == doctest::Approx(0.75 * 1.0 + 0.25 * 0.0));
    CHECK(t3.mean()[0] == doctest::Approx(w.mean()[0]).epsilon(1e-14));
}

TEST_CASE("thinning in d=2 keeps the support size") {
    const rng::Stream stream(7, "thin");
    std::vector<double> pts;
    for (int i = 0; i < 40; ++i) {
        pts.push_back(i);
        pts.push_back(-i);
    }
    const DiscreteMeasure mu = DiscreteMeasure::uniform(2, pts);
    const DiscreteMeasure t = thin(mu, 8, stream);
    CHECK(t.size() == 8);
    CHECK(t.dim() == 2);
}

TEST_CASE("dirac flow covers the grid") {
    const TimeGrid grid(1.0, 4);
    std::vector<Vec> path(grid.n_nodes(), Vec::Constant(1, 0.5));
    const MeasureFlow flow = MeasureFlow::dirac(grid, path);
    CHECK(flow.measures.size() == 5);
    CHECK(flow.at(3).size() == 1);
    CHECK_THROWS_AS(MeasureFlow::dirac(grid, std::vector<Vec>(3, Vec::Zero(1))), InvalidArgument);
}
