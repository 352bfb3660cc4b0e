#include "kalinv/quadrature.hpp"

#include "kalinv/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace kalinv {

NormalQuadrature gauss_hermite_normal(int order) {
    if (order < 1) throw InvalidArgument("quadrature order must be at least 1");
    // Jacobi matrix of the probabilists' Hermite polynomials: off-diagonal sqrt(k).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);

    NormalQuadrature q;
    q.nodes.resize(static_cast<std::size_t>(order));
    q.weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        q.nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        q.weights[static_cast<std::size_t>(i)] = v0 * v0;
    }
    return q;
}

}  // namespace kalinv
