#include "kalinv/gaussian.hpp"

#include "kalinv/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace kalinv {

Matrix symmetrize(const Matrix& c) { return 0.5 * (c + c.transpose()); }

CholeskyFactor cholesky_psd(const Matrix& c) {
    if (c.rows() != c.cols()) {
        throw DimensionMismatch("cholesky_psd expects a square matrix, got " +
                                std::to_string(c.rows()) + "x" + std::to_string(c.cols()));
    }
    const Eigen::Index n = c.rows();
    if (n == 0) return {Matrix(0, 0), 0.0};
    if (!c.allFinite()) throw FactorizationFailed("matrix has non-finite entries");

    const Matrix sym = symmetrize(c);
    const double scale = sym.trace() / static_cast<double>(n) + 1e-300;
    constexpr std::array<double, 5> schedule{0.0, 1e-14, 1e-12, 1e-10, 1e-8};

    for (double s : schedule) {
        const double delta = s * scale;
        Eigen::LLT<Matrix> llt(sym + delta * Matrix::Identity(n, n));
        if (llt.info() == Eigen::Success) return {llt.matrixL(), delta};
    }
    throw FactorizationFailed("matrix is not positive semidefinite (jitter schedule exhausted, trace " +
                              std::to_string(sym.trace()) + ")");
}

Matrix spd_solve(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("spd_solve: rhs rows differ from matrix size");
    const CholeskyFactor f = cholesky_psd(a);
    const auto lower = f.lower.triangularView<Eigen::Lower>();
    Matrix z = lower.solve(b);
    return lower.transpose().solve(z);
}

double default_spread(Eigen::Index n_theta) {
    return std::min(std::sqrt(4.0 / static_cast<double>(n_theta)), 1.0);
}

SigmaPointSet sigma_points(const GaussianState& state, double spread) {
    if (!(spread > 0.0)) throw InvalidArgument("sigma point spread must be positive");
    const Eigen::Index n = state.dim();
    if (state.cov.rows() != n || state.cov.cols() != n) {
        throw DimensionMismatch("covariance does not match mean dimension");
    }

    const Matrix root = cholesky_psd(state.cov).lower;
    const double c = spread * std::sqrt(static_cast<double>(n));

    SigmaPointSet set;
    set.spread = spread;
    set.cov_weight = 1.0 / (2.0 * spread * spread * static_cast<double>(n));
    set.points.reserve(static_cast<std::size_t>(2 * n + 1));
    set.points.push_back(state.mean);
    for (Eigen::Index j = 0; j < n; ++j) set.points.push_back(state.mean + c * root.col(j));
    for (Eigen::Index j = 0; j < n; ++j) set.points.push_back(state.mean - c * root.col(j));
    return set;
}

JointGaussian unscented_joint(const SigmaPointSet& points, std::span<const Vector> g_values,
                              const Matrix& prior_cov, const Matrix& noise_cov) {
    if (g_values.size() != points.size()) {
        throw DimensionMismatch("expected " + std::to_string(points.size()) + " forward values, got " +
                                std::to_string(g_values.size()));
    }
    const Eigen::Index n_theta = points.center().size();
    const Eigen::Index n_y = g_values[0].size();
    if (noise_cov.rows() != n_y || noise_cov.cols() != n_y) {
        throw DimensionMismatch("noise covariance does not match observation dimension");
    }

    JointGaussian joint;
    joint.mean_theta = points.center();
    joint.mean_y = g_values[0];
    joint.cov_theta = prior_cov;
    joint.cov_theta_y = Matrix::Zero(n_theta, n_y);
    joint.cov_yy = Matrix::Zero(n_y, n_y);

    for (std::size_t j = 1; j < points.size(); ++j) {
        if (g_values[j].size() != n_y) throw DimensionMismatch("forward values have inconsistent length");
        const Vector dtheta = points.points[j] - joint.mean_theta;
        const Vector dy = g_values[j] - joint.mean_y;
        joint.cov_theta_y.noalias() += dtheta * dy.transpose();
        joint.cov_yy.noalias() += dy * dy.transpose();
    }
    joint.cov_theta_y *= points.cov_weight;
    joint.cov_yy = symmetrize(points.cov_weight * joint.cov_yy + noise_cov);
    return joint;
}

GaussianState gaussian_condition(const JointGaussian& joint, const Vector& y_obs) {
    if (y_obs.size() != joint.mean_y.size()) {
        throw DimensionMismatch("observation length " + std::to_string(y_obs.size()) +
                                " differs from predicted length " + std::to_string(joint.mean_y.size()));
    }
    // Gain^T = cov_yy^{-1} cov_theta_y^T
    const Matrix gain_t = spd_solve(joint.cov_yy, joint.cov_theta_y.transpose());
    GaussianState out;
    out.mean = joint.mean_theta + gain_t.transpose() * (y_obs - joint.mean_y);
    out.cov = symmetrize(joint.cov_theta - joint.cov_theta_y * gain_t);
    return out;
}

}  // namespace kalinv
