#pragma once

#include "types.hpp"

#include <vector>

namespace mfg {

// Quadrature for expectations against the standard Gaussian:
// E[f(xi)] ~ sum_i weight[i] * f(node[i]), exact for polynomials of
// degree < 2*order (Gauss-Hermite, rescaled to unit variance).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights; // sum to 1

    explicit GaussHermite(int order);
};

// Tensor rule over `dim` independent standard Gaussians: order^dim points.
struct GaussHermiteTensor {
    std::vector<Vec> nodes;
    std::vector<double> weights;

    GaussHermiteTensor(int order, int dim);
};

} // namespace mfg
