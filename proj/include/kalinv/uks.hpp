#pragma once

#include "kalinv/errors.hpp"
#include "kalinv/gaussian.hpp"
#include "kalinv/problem.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace kalinv {

/// Posterior exp(-Phi(theta)) N(theta; r0, prior_cov) for y = G(theta) + eta.
struct BayesianSpec {
    Vector r0;
    Matrix prior_cov;
    ForwardMap forward;
    Vector y;
    Matrix sigma_eta;

    Eigen::Index n_theta() const { return r0.size(); }
    /// Phi(theta) + 1/2 |prior_cov^{-1/2}(theta - r0)|^2.
    double negative_log_density(const Vector& theta) const;
};

BayesianSpec bayesian_from(const InverseProblem& problem, const Vector& r0, const Matrix& prior_cov);

/// Closed-form posterior of a linear-Gaussian model y = G theta + eta.
GaussianState linear_gaussian_posterior(const Matrix& G, const Matrix& sigma_eta, const Vector& y,
                                        const Vector& r0, const Matrix& prior_cov);

/// One semi-implicit step of the unscented Kalman sampler flow
///   (I + h C_n P^{-1}) m_{n+1} = m_n + h (C^{theta y} E^{-1} (y - E G) + C_n P^{-1} r0)
///   (1 - 2h) C_{n+1}          = C_n - 2h (C^{theta y} E^{-1} C^{theta y, T} + C_n P^{-1} C_n)
/// with P the prior covariance and E = sigma_eta; expectations use the
/// modified unscented transform at N(m_n, C_n). Needs h < 1/2; a non-PSD
/// C_{n+1} raises UnstableStep.
GaussianState uks_step(const GaussianState& state, const BayesianSpec& spec, double h,
                       std::optional<double> spread = std::nullopt);

struct UksRecord {
    long step = 0;
    double time = 0.0;
    Vector mean;
    double cov_frobenius = 0.0;
    std::optional<double> mean_error;  // vs. reference posterior, when supplied
    std::optional<double> cov_error;
};

struct UksResult {
    std::vector<UksRecord> history;
    GaussianState final_state;
    long steps_taken = 0;
    bool completed = false;
    std::optional<ErrorKind> error_kind;
    std::string error_message;
};

/// Integrates ceil(t_end / h) steps from init. A record is kept every
/// record_every steps and at the final step; when `reference` is given the
/// records carry mean and covariance errors against it.
UksResult run_uks(const BayesianSpec& spec, const GaussianState& init, double h, double t_end,
                  const std::optional<GaussianState>& reference = std::nullopt, long record_every = 1000,
                  std::optional<double> spread = std::nullopt);

struct MetropolisResult {
    Vector mean;
    Matrix cov;
    double acceptance_rate = 0.0;
    long n_kept = 0;
    Vector mean_standard_error;  // batch-means estimate
};

/// Gaussian random-walk Metropolis with proposal covariance step_size^2 * prior_cov,
/// started at r0. Moments are accumulated over the samples after burn_in.
MetropolisResult rw_metropolis(const BayesianSpec& spec, long n_samples, double step_size, long burn_in,
                               std::uint64_t seed);

}  // namespace kalinv
