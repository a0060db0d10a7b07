#include "quadrature.hpp"

#include <Eigen/Eigenvalues>

namespace mfg {

GaussHermite::GaussHermite(int order) {
    if (order < 1) throw InvalidArgument("Gauss-Hermite order must be >= 1");

    // Golub-Welsch on the Jacobi matrix of the (physicists') Hermite
    // recurrence; off-diagonal entries sqrt(k/2).
    Mat jacobi = Mat::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = std::sqrt(k / 2.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi);
    nodes.resize(order);
    weights.resize(order);
    for (int i = 0; i < order; ++i) {
        // Rescale x -> sqrt(2) x to target exp(-x^2/2)/sqrt(2 pi); the
        // first eigenvector components squared already sum to one, which
        // is exactly the normalized weight.
        nodes[i] = std::sqrt(2.0) * eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        weights[i] = v0 * v0;
    }
    // The rule is symmetric by theory; enforce it against eigensolver
    // roundoff so affine integrands are handled without bias.
    for (int i = 0; i < order / 2; ++i) {
        const int j = order - 1 - i;
        const double x = 0.5 * (nodes[j] - nodes[i]);
        const double w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = weights[j] = w;
    }
    if (order % 2 == 1) nodes[order / 2] = 0.0;
}

GaussHermiteTensor::GaussHermiteTensor(int order, int dim) {
    if (dim < 1) throw InvalidArgument("quadrature dimension must be >= 1");
    const GaussHermite one(order);
    long total = 1;
    for (int q = 0; q < dim; ++q) total *= order;
    nodes.reserve(total);
    weights.reserve(total);
    std::vector<int> idx(dim, 0);
    for (long p = 0; p < total; ++p) {
        Vec x(dim);
        double w = 1.0;
        for (int q = 0; q < dim; ++q) {
            x[q] = one.nodes[idx[q]];
            w *= one.weights[idx[q]];
        }
        nodes.push_back(std::move(x));
        weights.push_back(w);
        for (int q = dim - 1; q >= 0; --q) {
            if (++idx[q] < order) break;
            idx[q] = 0;
        }
    }
}

} // namespace mfg
