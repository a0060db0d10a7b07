#pragma once

#include "rng.hpp"
#include "time_grid.hpp"
#include "types.hpp"

#include <vector>

namespace mfg {

// Weighted point cloud on R^d. Weights are kept normalized to total mass 1.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;

    // points is row-major: atom i occupies [i*dim, (i+1)*dim).
    DiscreteMeasure(int dim, std::vector<double> points, std::vector<double> weights);

    // Uniform weights.
    static DiscreteMeasure uniform(int dim, std::vector<double> points);
    static DiscreteMeasure dirac(const Vec& x);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(weights_.size()); }
    double weight(int i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& points() const { return points_; }
    Eigen::Map<const Vec> point(int i) const {
        return Eigen::Map<const Vec>(points_.data() + static_cast<std::size_t>(i) * dim_, dim_);
    }

    Vec mean() const;

    // M_p = (sum_i w_i |x_i|^p)^(1/p).
    double moment(int p) const;

    // Atoms scaled by s (dilation about the origin).
    DiscreteMeasure scaled(double s) const;
    // Atoms shifted by v.
    DiscreteMeasure shifted(const Vec& v) const;

private:
    int dim_ = 0;
    std::vector<double> points_;
    std::vector<double> weights_;
};

// Weight mixture (1-theta)*a + theta*b: support concatenation with scaled
// weights. Mass is preserved exactly.
DiscreteMeasure mix(const DiscreteMeasure& a, const DiscreteMeasure& b, double theta);

// Reduce to `support_size` atoms. In d=1, deterministic stratified quantile
// thinning (atom at each weight level (i+1/2)/S, stable ties on atom index);
// otherwise weighted sampling without replacement driven by `stream`.
DiscreteMeasure thin(const DiscreteMeasure& mu, int support_size, const rng::Stream& stream);

// One measure per time-grid node.
struct MeasureFlow {
    TimeGrid grid;
    std::vector<DiscreteMeasure> measures;

    const DiscreteMeasure& at(int j) const { return measures.at(j); }

    static MeasureFlow dirac(const TimeGrid& grid, const std::vector<Vec>& path);
    static MeasureFlow constant(const TimeGrid& grid, const DiscreteMeasure& mu);
};

} // namespace mfg
