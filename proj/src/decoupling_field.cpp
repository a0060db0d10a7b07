#include "decoupling_field.hpp"

#include <algorithm>
#include <cmath>

namespace mfg {

Vec SpatialLattice::node(int flat) const {
    Vec x(dim);
    if (dim == 1) {
        x[0] = lower[0] + flat * spacing;
    } else {
        x[0] = lower[0] + (flat / counts[1]) * spacing;
        x[1] = lower[1] + (flat % counts[1]) * spacing;
    }
    return x;
}

void DecouplingField::eval_into(int time_node, const Vec& x, Vec& out) const {
    const auto& v = values[time_node];
    const int d = value_dim;
    out.resize(d);

    if (lattice.dim == 1) {
        const int nx = lattice.counts[0];
        const double s = (x[0] - lattice.lower[0]) / lattice.spacing;
        const int i = std::clamp(static_cast<int>(std::floor(s)), 0, nx - 2);
        const double w = s - i; // unclamped: linear extrapolation outside
        for (int c = 0; c < d; ++c)
            out[c] = (1.0 - w) * v[i * d + c] + w * v[(i + 1) * d + c];
        return;
    }

    const int nx = lattice.counts[0], ny = lattice.counts[1];
    const double sx = (x[0] - lattice.lower[0]) / lattice.spacing;
    const double sy = (x[1] - lattice.lower[1]) / lattice.spacing;
    const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, nx - 2);
    const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, ny - 2);
    // Clamped bilinear weights plus one-sided gradients for the overhang;
    // this keeps the extension linear (no bilinear cross growth).
    const double wxr = sx - i, wyr = sy - j;
    const double wx = std::clamp(wxr, 0.0, 1.0);
    const double wy = std::clamp(wyr, 0.0, 1.0);
    const double ox = wxr - wx, oy = wyr - wy;
    auto at = [&](int a, int b, int c) { return v[(a * ny + b) * d + c]; };
    for (int c = 0; c < d; ++c) {
        const double v00 = at(i, j, c), v10 = at(i + 1, j, c);
        const double v01 = at(i, j + 1, c), v11 = at(i + 1, j + 1, c);
        const double base = (1 - wx) * (1 - wy) * v00 + wx * (1 - wy) * v10 +
                            (1 - wx) * wy * v01 + wx * wy * v11;
        const double gx = (1 - wy) * (v10 - v00) + wy * (v11 - v01);
        const double gy = (1 - wx) * (v01 - v00) + wx * (v11 - v10);
        out[c] = base + ox * gx + oy * gy;
    }
}

Vec DecouplingField::eval(int time_node, const Vec& x) const {
    Vec out;
    eval_into(time_node, x, out);
    return out;
}

double DecouplingField::discrete_lipschitz() const {
    const int d = value_dim;
    double worst = 0.0;
    const int nx = lattice.counts[0];
    const int ny = (lattice.dim == 2) ? lattice.counts[1] : 1;
    for (const auto& v : values) {
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                const int base = (i * ny + j) * d;
                if (i + 1 < nx) {
                    double s = 0.0;
                    for (int c = 0; c < d; ++c) {
                        const double diff = v[((i + 1) * ny + j) * d + c] - v[base + c];
                        s += diff * diff;
                    }
                    worst = std::max(worst, std::sqrt(s) / lattice.spacing);
                }
                if (j + 1 < ny) {
                    double s = 0.0;
                    for (int c = 0; c < d; ++c) {
                        const double diff = v[(i * ny + j + 1) * d + c] - v[base + c];
                        s += diff * diff;
                    }
                    worst = std::max(worst, std::sqrt(s) / lattice.spacing);
                }
            }
        }
    }
    return worst;
}

double DecouplingField::growth_constant() const {
    const int d = value_dim;
    double worst = 0.0;
    for (const auto& v : values) {
        for (int node = 0; node < lattice.n_nodes(); ++node) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += v[node * d + c] * v[node * d + c];
            worst = std::max(worst, std::sqrt(s) / (1.0 + lattice.node(node).norm()));
        }
    }
    return worst;
}

RegularityReport check_value_function(const DecouplingField& field, double growth_cap) {
    RegularityReport r;
    r.lipschitz = field.discrete_lipschitz();
    r.growth = field.growth_constant();
    r.cap = growth_cap;
    r.flagged = r.growth > growth_cap;
    return r;
}

} // namespace mfg
