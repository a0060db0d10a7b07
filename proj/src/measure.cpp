#include "measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfg {

DiscreteMeasure::DiscreteMeasure(int dim, std::vector<double> points, std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {
    if (dim_ < 1) throw InvalidArgument("measure dimension must be >= 1");
    if (points_.size() != weights_.size() * static_cast<std::size_t>(dim_))
        throw InvalidArgument("measure points/weights size mismatch");
    if (weights_.empty()) throw InvalidArgument("measure must have at least one atom");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw InvalidArgument("measure weights must be non-negative");
        total += w;
    }
    for (double p : points_)
        if (!std::isfinite(p)) throw InvalidArgument("measure atoms must be finite");
    if (std::abs(total - 1.0) > 1e-12) {
        if (total <= 0.0) throw InvalidArgument("measure weights must have positive mass");
        for (double& w : weights_) w /= total;
    }
}

DiscreteMeasure DiscreteMeasure::uniform(int dim, std::vector<double> points) {
    const std::size_t n = points.size() / dim;
    return DiscreteMeasure(dim, std::move(points), std::vector<double>(n, 1.0 / n));
}

DiscreteMeasure DiscreteMeasure::dirac(const Vec& x) {
    return DiscreteMeasure(static_cast<int>(x.size()),
                           std::vector<double>(x.data(), x.data() + x.size()), {1.0});
}

Vec DiscreteMeasure::mean() const {
    Vec m = Vec::Zero(dim_);
    for (int i = 0; i < size(); ++i) m += weights_[i] * point(i);
    return m;
}

double DiscreteMeasure::moment(int p) const {
    if (p < 1) throw InvalidArgument("moment order must be >= 1");
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += weights_[i] * std::pow(point(i).norm(), p);
    return std::pow(s, 1.0 / p);
}

DiscreteMeasure DiscreteMeasure::scaled(double s) const {
    std::vector<double> pts(points_);
    for (double& v : pts) v *= s;
    return DiscreteMeasure(dim_, std::move(pts), weights_);
}

DiscreteMeasure DiscreteMeasure::shifted(const Vec& v) const {
    if (v.size() != dim_) throw InvalidArgument("shift dimension mismatch");
    std::vector<double> pts(points_);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] += v[i % dim_];
    return DiscreteMeasure(dim_, std::move(pts), weights_);
}

DiscreteMeasure mix(const DiscreteMeasure& a, const DiscreteMeasure& b, double theta) {
    if (a.dim() != b.dim()) throw InvalidArgument("mixture dimension mismatch");
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("mixture weight must be in [0,1]");
    std::vector<double> pts;
    std::vector<double> w;
    pts.reserve(a.points().size() + b.points().size());
    w.reserve(a.size() + b.size());
    pts.insert(pts.end(), a.points().begin(), a.points().end());
    pts.insert(pts.end(), b.points().begin(), b.points().end());
    for (int i = 0; i < a.size(); ++i) w.push_back((1.0 - theta) * a.weight(i));
    for (int i = 0; i < b.size(); ++i) w.push_back(theta * b.weight(i));
    return DiscreteMeasure(a.dim(), std::move(pts), std::move(w));
}

DiscreteMeasure thin(const DiscreteMeasure& mu, int support_size, const rng::Stream& stream) {
    if (support_size < 1) throw InvalidArgument("support size must be >= 1");
    const int n = mu.size();
    if (n <= support_size && mu.dim() > 1) return mu;

    if (mu.dim() == 1) {
        // Stratified quantile thinning: split the sorted mass into S strata
        // of weight 1/S and represent each stratum by its conditional mean
        // (atoms straddling a boundary contribute proportionally). This is
        // the W2-optimal S-point quantization of the sorted support and
        // preserves the mean exactly.
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
            return mu.points()[i] < mu.points()[j];
        });
        std::vector<double> pts(support_size);
        const double stratum = 1.0 / support_size;
        int pos = 0;
        double remaining = mu.weight(order[0]);
        for (int i = 0; i < support_size; ++i) {
            double need = stratum;
            double acc = 0.0;
            while (need > 0.0) {
                const double take = std::min(need, remaining);
                acc += take * mu.points()[order[pos]];
                need -= take;
                remaining -= take;
                if (remaining <= 1e-18) {
                    if (pos == n - 1) break; // mass exhausted by roundoff
                    remaining = mu.weight(order[++pos]);
                }
            }
            const double consumed = stratum - std::max(0.0, need);
            pts[i] = (consumed > 0.0) ? acc / consumed : mu.points()[order[n - 1]];
        }
        return DiscreteMeasure::uniform(1, std::move(pts));
    }

    // Weighted sampling without replacement (systematic over a random
    // permutation threshold is overkill here; plain sequential draws).
    std::vector<double> remaining(mu.weights());
    std::vector<char> taken(n, 0);
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(support_size) * mu.dim());
    double mass = 1.0;
    for (int i = 0; i < support_size; ++i) {
        const double u = stream.uniform(0x7468696Eull, i) * mass;
        double acc = 0.0;
        int pick = -1;
        for (int j = 0; j < n; ++j) {
            if (taken[j]) continue;
            acc += remaining[j];
            if (u <= acc) {
                pick = j;
                break;
            }
        }
        if (pick < 0)
            for (int j = n - 1; j >= 0; --j)
                if (!taken[j]) {
                    pick = j;
                    break;
                }
        taken[pick] = 1;
        mass -= remaining[pick];
        const auto x = mu.point(pick);
        pts.insert(pts.end(), x.data(), x.data() + x.size());
        if (mass <= 0.0) mass = 0.0;
    }
    return DiscreteMeasure::uniform(mu.dim(), std::move(pts));
}

MeasureFlow MeasureFlow::dirac(const TimeGrid& grid, const std::vector<Vec>& path) {
    if (static_cast<int>(path.size()) != grid.n_nodes())
        throw InvalidArgument("dirac flow path length must match grid nodes");
    MeasureFlow flow;
    flow.grid = grid;
    flow.measures.reserve(path.size());
    for (const Vec& x : path) flow.measures.push_back(DiscreteMeasure::dirac(x));
    return flow;
}

MeasureFlow MeasureFlow::constant(const TimeGrid& grid, const DiscreteMeasure& mu) {
    MeasureFlow flow;
    flow.grid = grid;
    flow.measures.assign(grid.n_nodes(), mu);
    return flow;
}

} // namespace mfg
