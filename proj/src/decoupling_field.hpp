#pragma once

#include "time_grid.hpp"
#include "types.hpp"

#include <array>
#include <optional>
#include <vector>

namespace mfg {

// Rectangular lattice on [lower, lower + (count-1) h]^dim, dim <= 2.
struct SpatialLattice {
    int dim = 1;
    Vec lower;
    double spacing = 0.02;
    std::array<int, 2> counts = {2, 1};

    int n_nodes() const { return counts[0] * (dim == 2 ? counts[1] : 1); }
    Vec node(int flat) const;
    double upper(int axis) const { return lower[axis] + (counts[axis] - 1) * spacing; }
};

struct LatticeConfig {
    double spacing = 0.02;
    std::optional<double> radius; // default: max(6 |sigma| sqrt(T), 4 (1+|x0|) e^{c_L T})
    int quad_order = 8;
    double inner_tol = 1e-9;
    int inner_max_iters = 100;
    double extrapolation_margin = 0.1; // fraction of radius before out-of-bounds warnings
};

// Lattice representation of the adjoint field u(t, x) in R^d with
// Y_t = u(t, X_t). Values are stored per time node, row-major over lattice
// nodes, d components each. Evaluation is multilinear inside the box and
// extends linearly outside it with the one-sided boundary gradient.
struct DecouplingField {
    TimeGrid grid;
    SpatialLattice lattice;
    int value_dim = 1;
    std::vector<std::vector<double>> values; // [time node][node * d + comp]
    long out_of_bounds_warnings = 0;         // drift left the padded box during the solve

    Vec eval(int time_node, const Vec& x) const;
    void eval_into(int time_node, const Vec& x, Vec& out) const;

    // max over time nodes and adjacent lattice nodes of |du|/h.
    double discrete_lipschitz() const;
    // smallest c with |u(t,x)| <= c (1 + |x|) over the lattice.
    double growth_constant() const;
};

struct RegularityReport {
    double lipschitz = 0.0;
    double growth = 0.0;
    double cap = 0.0;
    bool flagged = false;
};

RegularityReport check_value_function(const DecouplingField& field,
                                      double growth_cap = std::numeric_limits<double>::infinity());

} // namespace mfg
