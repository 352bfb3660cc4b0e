#pragma once

#include <vector>

namespace kalinv {

/// Nodes and weights integrating against the standard normal density:
/// E[f(Z)] ~ sum_i weights[i] * f(nodes[i]), Z ~ N(0, 1).
struct NormalQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule of the given order (Golub-Welsch), exact for polynomials
/// of degree < 2 * order.
NormalQuadrature gauss_hermite_normal(int order);

}  // namespace kalinv
