#pragma once

#include "kalinv/engines.hpp"
#include "kalinv/gaussian.hpp"

#include <span>
#include <vector>

namespace kalinv::theory {

/// Linear instance of the regularizing dynamics.
struct LinearProblemSpec {
    Matrix G;
    Vector y;
    Matrix sigma_nu;
    Matrix sigma_omega;
    double alpha = 1.0;
    Vector r0;

    Eigen::Index n_theta() const { return G.cols(); }
    Eigen::Index n_y() const { return G.rows(); }
    HyperParams hyperparams() const;
    void check() const;
};

struct SteadyState {
    Matrix c_inf;
    Matrix c_hat_inf;  // alpha^2 c_inf + sigma_omega
    Vector m_inf;
    int iterations_to_converge = 0;
};

/// Fixed point of the precision recursion
///   C_{n+1}^{-1} = G^T sigma_nu^{-1} G + (alpha^2 C_n + sigma_omega)^{-1},
/// iterated from C_0 = c0_scale * I until the Frobenius change drops below
/// 1e-13 (relative) or 1e5 iterations pass (NoConvergence).
/// m_inf is filled from minimize_phi_r.
SteadyState solve_steady_covariance(const LinearProblemSpec& spec, double c0_scale = 1.0);

/// Residual |C^{-1} - G^T sigma_nu^{-1} G - (alpha^2 C + sigma_omega)^{-1}|_F.
double steady_state_residual(const LinearProblemSpec& spec, const Matrix& c_inf);

/// Phi_R(theta) = 1/2 |sigma_nu^{-1/2}(y - G theta)|^2 + (1-alpha)/2 |c_hat^{-1/2}(theta - r0)|^2.
double phi_r(const LinearProblemSpec& spec, const Matrix& c_hat_inf, const Vector& theta);

/// Closed-form minimizer of phi_r from its normal equations.
Vector minimize_phi_r(const LinearProblemSpec& spec, const Matrix& c_hat_inf);

/// Central-difference gradient of phi_r.
Vector phi_r_gradient_fd(const LinearProblemSpec& spec, const Matrix& c_hat_inf, const Vector& theta,
                         double step = 1e-5);

/// Symmetric square root and inverse square root via eigendecomposition.
Matrix sqrt_spd(const Matrix& a);
Matrix inv_sqrt_spd(const Matrix& a);

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues below
/// 1e-12 * max|eigenvalue| are treated as zero.
Matrix pseudo_inverse_sym(const Matrix& a);

/// Per-step residuals of the alpha = 1, sigma_omega = 0 closed form in the
/// whitened variables C' = C0^{-1/2} C C0^{-1/2}, m' = C0^{-1/2} m, G' = G C0^{1/2}.
struct AlgebraicLawStep {
    int n = 0;
    double covariance_residual = 0.0;  // |C_n'(I + nS) - I|_F
    double mean_residual = 0.0;        // |(I + nS) m_n' - m_0' - n G'^T sigma_nu^{-1} y| / max(1, |rhs|)
    double collapse_error = 0.0;       // |n^{-1} P (C_n')^{-1} - S|_F
};

struct AlgebraicLawReport {
    std::vector<AlgebraicLawStep> steps;  // n = 0..n_max
    double max_covariance_residual = 0.0;
    double max_mean_residual = 0.0;
    Matrix S;
};

AlgebraicLawReport algebraic_law_check(const Matrix& G, const Matrix& sigma_nu, const Matrix& C0, const Vector& m0,
                                       const Vector& y, int n_max);

/// Per-step margins of the bound C_n <= C_0 + n sigma_omega under alpha = 1.
struct DivergenceStep {
    int n = 0;
    double min_eig_margin = 0.0;   // lambda_min(C_0 + n sigma_omega - C_n)
    double bound_eig_range = 0.0;  // lambda_max - lambda_min of C_0 + n sigma_omega
    double cov_frobenius = 0.0;
    double mean_increment = 0.0;   // |m_n - m_{n-1}|
    Vector mean;
};

struct DivergenceReport {
    std::vector<DivergenceStep> steps;  // n = 1..n_max
    double min_margin = 0.0;
    bool covariance_grows = false;      // |C_n|_F at n_max exceeds 10x its value at n = 1
    double mean_increment_rate = 0.0;   // fitted log-decay rate of |m_n - m_{n-1}|
    Vector final_mean;
};

DivergenceReport divergence_bound_check(const LinearProblemSpec& spec, const Matrix& C0, const Vector& m0,
                                        int n_max);

/// Least-squares slope of log(errors[n]) against n over n = first..end, skipping
/// non-positive entries. Negative slope means exponential decay.
double fit_log_rate(std::span<const double> errors, std::size_t first = 5);

}  // namespace kalinv::theory
