#include "wasserstein.hpp"

#include "transport_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfg {

namespace {

struct SortedSupport {
    std::vector<double> value;
    std::vector<double> weight;
};

SortedSupport sort_support(const DiscreteMeasure& mu) {
    const int n = mu.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return mu.points()[i] < mu.points()[j]; });
    SortedSupport s;
    s.value.reserve(n);
    s.weight.reserve(n);
    for (int i : order) {
        s.value.push_back(mu.points()[i]);
        s.weight.push_back(mu.weight(i));
    }
    return s;
}

std::vector<double> pairwise_cost(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                  bool squared) {
    const int na = a.size(), nb = b.size();
    std::vector<double> c(static_cast<std::size_t>(na) * nb);
    for (int i = 0; i < na; ++i) {
        const auto xi = a.point(i);
        for (int j = 0; j < nb; ++j) {
            const double d2 = (xi - b.point(j)).squaredNorm();
            c[static_cast<std::size_t>(i) * nb + j] = squared ? d2 : std::sqrt(d2);
        }
    }
    return c;
}

transport::Result solve_ot(const DiscreteMeasure& a, const DiscreteMeasure& b, bool squared) {
    if (a.dim() != b.dim()) throw InvalidArgument("w2: dimension mismatch");
    if (static_cast<long long>(a.size()) * b.size() > (1ll << 20))
        throw InvalidArgument("w2_exact: support-size product exceeds 2^20");
    transport::TransportSimplex simplex;
    auto result = simplex.solve(a.weights(), b.weights(), pairwise_cost(a, b, squared));
    if (result.status != transport::Status::success)
        throw SolverError("transport LP failed", 0.0, 0);
    return result;
}

} // namespace

double w2_1d(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.dim() != 1 || b.dim() != 1) throw InvalidArgument("w2_1d requires d = 1");
    const SortedSupport sa = sort_support(a);
    const SortedSupport sb = sort_support(b);
    std::size_t ia = 0, ib = 0;
    double rema = sa.weight[0];
    double remb = sb.weight[0];
    double acc = 0.0;
    while (true) {
        const double mass = std::min(rema, remb);
        const double d = sa.value[ia] - sb.value[ib];
        acc += mass * d * d;
        rema -= mass;
        remb -= mass;
        if (rema <= 0.0) {
            if (++ia == sa.value.size()) break;
            rema = sa.weight[ia];
        }
        if (remb <= 0.0) {
            if (++ib == sb.value.size()) break;
            remb = sb.weight[ib];
        }
    }
    return std::sqrt(std::max(0.0, acc));
}

double w2_exact(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return std::sqrt(std::max(0.0, solve_ot(a, b, true).cost));
}

double w1_exact(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return std::max(0.0, solve_ot(a, b, false).cost);
}

W2Plan w2_exact_with_plan(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    const auto result = solve_ot(a, b, true);
    W2Plan out;
    out.distance = std::sqrt(std::max(0.0, result.cost));
    out.plan.reserve(result.plan_arcs.size());
    const int nb = b.size();
    for (std::size_t k = 0; k < result.plan_arcs.size(); ++k) {
        const auto arc = result.plan_arcs[k];
        out.plan.push_back({static_cast<int>(arc / nb), static_cast<int>(arc % nb),
                            result.plan_flows[k]});
    }
    return out;
}

double normal_quantile(double u) {
    // Wichura, Algorithm AS241 (PPND16).
    if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("normal_quantile needs u in (0,1)");
    const double q = u - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) *
                        r +
                    4.5921953931549871457e4) *
                       r +
                   1.3731693765509461125e4) *
                      r +
                  1.9715909503065514427e3) *
                     r +
                 1.3314166789178437745e2) *
                    r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) *
                        r +
                    2.1213794301586595867e4) *
                       r +
                   5.3941960214247511077e3) *
                      r +
                  6.8718700749205790830e2) *
                     r +
                 4.2313330701600911252e1) *
                    r +
                1.0);
    }
    r = (q < 0.0) ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) *
                         r +
                     1.27045825245236838258e0) *
                        r +
                    3.64784832476320460504e0) *
                       r +
                   5.76949722146069140550e0) *
                      r +
                  4.63033784615654529590e0) *
                     r +
                 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) *
                         r +
                     1.48103976427480074590e-1) *
                        r +
                    6.89767334985100004550e-1) *
                       r +
                   1.67638483018380384940e0) *
                      r +
                  2.05319162663775882187e0) *
                     r +
                 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) *
                         r +
                     2.65321895265761230930e-2) *
                        r +
                    2.96560571828504891230e-1) *
                       r +
                   1.78482653991729133580e0) *
                      r +
                  5.46378491116411436990e0) *
                     r +
                 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) *
                         r +
                     7.86869131145613259100e-4) *
                        r +
                    1.48753612908506148525e-2) *
                       r +
                   1.36929880922735805310e-1) *
                      r +
                  5.99832206555887937690e-1) *
                     r +
                 1.0);
    }
    return (q < 0.0) ? -value : value;
}

LawSampler LawSampler::gaussian(double mean, double sd) {
    LawSampler s;
    s.name = "gaussian";
    s.quantile = [mean, sd](double u) { return mean + sd * normal_quantile(u); };
    return s;
}

LawSampler LawSampler::uniform01(double lo, double hi) {
    LawSampler s;
    s.name = "uniform";
    s.quantile = [lo, hi](double u) { return lo + (hi - lo) * u; };
    return s;
}

LawSampler LawSampler::dirac(double at) {
    LawSampler s;
    s.name = "dirac";
    s.quantile = [at](double) { return at; };
    return s;
}

LawSampler LawSampler::by_name(const std::string& name) {
    if (name == "gaussian") return gaussian();
    if (name == "uniform") return uniform01();
    if (name == "dirac") return dirac();
    throw InvalidArgument("unknown sampler: " + name);
}

namespace {

DiscreteMeasure quantile_discretization(const LawSampler& law, int atoms, double offset) {
    std::vector<double> pts(atoms);
    for (int i = 0; i < atoms; ++i) pts[i] = law.quantile((i + offset) / atoms);
    return DiscreteMeasure::uniform(1, std::move(pts));
}

} // namespace

RateTable empirical_rate_experiment(const LawSampler& law, const std::vector<long>& sample_sizes,
                                    int reps, std::uint64_t seed, int reference_atoms) {
    if (reps < 2) throw InvalidArgument("rate experiment requires reps >= 2");
    if (sample_sizes.empty()) throw InvalidArgument("rate experiment requires sample sizes");
    for (std::size_t i = 1; i < sample_sizes.size(); ++i)
        if (sample_sizes[i] <= sample_sizes[i - 1])
            throw InvalidArgument("sample sizes must be increasing");

    const DiscreteMeasure reference = quantile_discretization(law, reference_atoms, 0.5);

    RateTable table;
    table.sample_sizes = sample_sizes;
    table.reference_atoms = reference_atoms;
    table.reference_check_w2 = w2_1d(quantile_discretization(law, reference_atoms, 0.25),
                                     quantile_discretization(law, reference_atoms, 0.75));

    const rng::Stream base(seed, "wasserstein_rate");
    for (std::size_t ni = 0; ni < sample_sizes.size(); ++ni) {
        const long n = sample_sizes[ni];
        double sum = 0.0, sumsq = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            const rng::Stream stream = base.child(ni).child(rep);
            std::vector<double> pts(n);
            for (long i = 0; i < n; ++i) pts[i] = law.quantile(stream.uniform(i, 0));
            const double w = w2_1d(DiscreteMeasure::uniform(1, std::move(pts)), reference);
            const double w2sq = w * w;
            sum += w2sq;
            sumsq += w2sq * w2sq;
        }
        const double mean = sum / reps;
        const double var = std::max(0.0, (sumsq - reps * mean * mean) / (reps - 1));
        table.mean_w2sq.push_back(mean);
        table.stderr_w2sq.push_back(std::sqrt(var / reps));
    }

    // Lemma-style bound C N^{-2/(d+4)} in d = 1, calibrated at the first N.
    const double exponent = -0.4;
    const double c = table.mean_w2sq.front() / std::pow(static_cast<double>(sample_sizes.front()), exponent);
    for (long n : sample_sizes) table.bound.push_back(c * std::pow(static_cast<double>(n), exponent));

    // Log-log least squares slope (skip exact zeros from degenerate laws).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
        if (table.mean_w2sq[i] <= 0.0) continue;
        const double x = std::log(static_cast<double>(sample_sizes[i]));
        const double y = std::log(table.mean_w2sq[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    table.fitted_slope =
        (count >= 2) ? (count * sxy - sx * sy) / (count * sxx - sx * sx) : 0.0;
    return table;
}

} // namespace mfg
