#pragma once

#include "measure.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mfg {

// Exact W_2 in d=1 via the quantile coupling, evaluated on the merged
// cumulative-weight partition of the two sorted supports. Ties are broken
// by stable sort on atom index.
double w2_1d(const DiscreteMeasure& a, const DiscreteMeasure& b);

// Exact W_2 in any dimension via the transportation LP (network simplex).
// Requires |a| * |b| <= 2^20.
double w2_exact(const DiscreteMeasure& a, const DiscreteMeasure& b);

// Same LP with linear (unsquared Euclidean) cost.
double w1_exact(const DiscreteMeasure& a, const DiscreteMeasure& b);

struct TransportPlanEntry {
    int from = 0;
    int to = 0;
    double mass = 0.0;
};

struct W2Plan {
    double distance = 0.0;
    std::vector<TransportPlanEntry> plan;
};

W2Plan w2_exact_with_plan(const DiscreteMeasure& a, const DiscreteMeasure& b);

// A scalar law given by its quantile function (inverse CDF on (0,1)).
struct LawSampler {
    std::string name;
    std::function<double(double)> quantile;

    static LawSampler gaussian(double mean = 0.0, double sd = 1.0);
    static LawSampler uniform01(double lo = 0.0, double hi = 1.0);
    static LawSampler dirac(double at = 0.0);
    static LawSampler by_name(const std::string& name);
};

// Inverse standard normal CDF (Wichura's AS241, double precision).
double normal_quantile(double u);

struct RateTable {
    std::vector<long> sample_sizes;
    std::vector<double> mean_w2sq;
    std::vector<double> stderr_w2sq;
    std::vector<double> bound; // C * N^(-2/(d+4)) with C calibrated at the first N
    double fitted_slope = 0.0;
    double reference_check_w2 = 0.0; // distance between two staggered reference discretizations
    int reference_atoms = 0;
};

// Monte Carlo estimate of E[W_2^2(empirical_N, reference)] per sample size,
// against a fixed quantile discretization of the law. One RNG stream per
// (N, rep) pair, so results do not depend on scheduling.
RateTable empirical_rate_experiment(const LawSampler& law, const std::vector<long>& sample_sizes,
                                    int reps, std::uint64_t seed, int reference_atoms = 100000);

} // namespace mfg
