#pragma once

#include "kalinv/problem.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace kalinv::problems {

/// Karhunen-Loeve basis of the Gaussian field with covariance (-Laplace + tau^2)^{-d}
/// under Neumann conditions, sampled on grid_n x grid_n nodes of [0,1]^2
/// (spacing 1/(grid_n - 1)).
///
/// Lattice indices l in N0^2 \ {0} with |l|_inf <= 32 are ordered by descending
/// eigenvalue, ties broken by (l1, l2) lexicographically.
class KLField2D {
public:
    KLField2D(int grid_n, int n_modes, double tau = 3.0, double d = 2.0);

    int grid_n() const { return grid_n_; }
    int n_modes() const { return static_cast<int>(lambda_.size()); }
    double eigenvalue(int k) const { return lambda_[static_cast<std::size_t>(k)]; }
    std::pair<int, int> lattice_index(int k) const { return index_[static_cast<std::size_t>(k)]; }

    /// psi_k at every node, row-major with x1 varying fastest.
    const Vector& mode(int k) const { return modes_[static_cast<std::size_t>(k)]; }

    /// log a = sum_k theta_k sqrt(lambda_k) psi_k over the first theta.size() modes.
    Vector log_field(const Vector& theta) const;

    /// Trapezoidal inner product over the node grid.
    double inner(const Vector& u, const Vector& v) const;

private:
    int grid_n_;
    std::vector<double> lambda_;
    std::vector<std::pair<int, int>> index_;
    std::vector<Vector> modes_;
    Vector trap_weights_;
};

/// Solves -div(a grad p) = f on [0,1]^2 with p = 0 on the boundary using the
/// 5-point stencil with arithmetic-mean face coefficients and f averaged over
/// each node's control volume. `log_a` lives on
/// the grid_n x grid_n nodes; the returned pressure does too (boundary zeros
/// included). Throws SolveFailure if the relative residual exceeds 1e-10.
Vector darcy_pressure(int grid_n, const Vector& log_a);

/// Piecewise source: 1000 for x2 <= 4/6, 2000 for x2 <= 5/6, 3000 above.
double darcy_source(double x2);

/// Bilinear interpolation of nodal values at (x1, x2).
double interpolate_nodal(int grid_n, const Vector& values, double x1, double x2);

/// The 7 x 7 lattice (i/8, j/8), i, j = 1..7, with x1 varying fastest.
std::vector<std::pair<double, double>> darcy_observation_points();

struct DarcyOptions {
    int grid_n = 80;
    int n_modes_truth = 256;
    int n_theta = 32;
    std::uint64_t seed = 0;
};

/// Forward map theta -> pressure at the 49 observation points, with the
/// truth field drawn from N(0, I) over n_modes_truth modes. sigma_eta = I,
/// field_error is the relative L2 error of log a against the truth field.
/// theta_ref holds the first n_theta truth coefficients.
InverseProblem darcy2d(const DarcyOptions& options);

}  // namespace kalinv::problems
