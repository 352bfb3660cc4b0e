#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace kalinv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Mean and covariance of a Gaussian over the parameter space.
struct GaussianState {
    Vector mean;
    Matrix cov;

    Eigen::Index dim() const { return mean.size(); }
};

/// Lower Cholesky factor together with the diagonal shift that was needed to obtain it.
struct CholeskyFactor {
    Matrix lower;
    double jitter = 0.0;
};

/// Returns (C + C^T) / 2.
Matrix symmetrize(const Matrix& c);

/// Cholesky factor of a symmetric positive semidefinite matrix.
///
/// Tries the plain factorization first; on failure the diagonal is shifted by
/// delta = s * (trace(C)/N + 1e-300) for s in {1e-14, 1e-12, 1e-10, 1e-8} and the
/// first shift that factors is kept. Throws FactorizationFailed when the schedule
/// is exhausted, which in practice means C is indefinite.
CholeskyFactor cholesky_psd(const Matrix& c);

/// Solves A X = B for symmetric positive definite A through its Cholesky factor.
Matrix spd_solve(const Matrix& a, const Matrix& b);

/// Default spread of the modified unscented transform, min(sqrt(4/N), 1).
double default_spread(Eigen::Index n_theta);

/// The 2N+1 symmetric sigma points of the modified unscented transform.
struct SigmaPointSet {
    std::vector<Vector> points;  // points[0] is the generating mean
    double cov_weight = 0.0;     // uniform weight for j = 1..2N
    double spread = 0.0;

    std::size_t size() const { return points.size(); }
    const Vector& center() const { return points.front(); }
};

SigmaPointSet sigma_points(const GaussianState& state, double spread);

/// Gaussian projection of the joint law of (theta, y).
struct JointGaussian {
    Vector mean_theta;
    Vector mean_y;
    Matrix cov_theta;
    Matrix cov_theta_y;
    Matrix cov_yy;
};

/// Builds the joint Gaussian from forward values at the sigma points.
/// Uses the first-order mean rule: mean_y and all deviations are taken about the
/// center value g_values[0].
JointGaussian unscented_joint(const SigmaPointSet& points, std::span<const Vector> g_values,
                              const Matrix& prior_cov, const Matrix& noise_cov);

/// Conditions the joint Gaussian on an observed y.
GaussianState gaussian_condition(const JointGaussian& joint, const Vector& y_obs);

}  // namespace kalinv
