#pragma once

#include "kalinv/errors.hpp"
#include "kalinv/gaussian.hpp"
#include "kalinv/problem.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace kalinv {

using Rng = std::mt19937_64;

/// Parameters of the regularizing AR(1) dynamics
///   theta_{n+1} = alpha theta_n + (1 - alpha) r0 + omega,  omega ~ N(0, sigma_omega)
///   y_{n+1}     = G(theta_{n+1}) + nu,                      nu ~ N(0, sigma_nu)
struct HyperParams {
    double alpha = 1.0;
    Vector r0;
    double gamma = 1.0;
    Matrix sigma_omega;
    Matrix sigma_nu;
    double spread_a = 1.0;

    /// sigma_nu = 2 sigma_eta, sigma_omega = (2 - alpha^2) gamma I, spread from the
    /// parameter dimension unless overridden.
    static HyperParams standard(double alpha, const Vector& r0, double gamma, const Matrix& sigma_eta,
                                std::optional<double> spread = std::nullopt);

    /// Enforces 0 < alpha <= 1, gamma > 0, spread > 0 and positive definite noise covariances.
    void validate() const;
};

/// Particle approximation used by EKI. The generator that drives the run is
/// seeded from rng_seed; draw_ensemble sets it from its own stream after the draws.
struct Ensemble {
    std::vector<Vector> particles;
    std::uint64_t rng_seed = 0;

    std::size_t size() const { return particles.size(); }
    Vector mean() const;
    /// Empirical covariance with 1/(J-1) normalization.
    Matrix covariance() const;
};

/// Draws J particles from N(state.mean, state.cov).
Ensemble draw_ensemble(const GaussianState& state, std::size_t J, std::uint64_t seed);

struct ConvergenceRecord {
    int iteration = 0;
    Vector mean;
    double cov_frobenius = 0.0;
    double misfit = 0.0;
    std::optional<double> param_error;
    std::optional<double> relative_field_error;
};

GaussianState predict(const GaussianState& state, const HyperParams& hp);

/// One unscented Kalman inversion step: 2N+1 forward evaluations.
GaussianState uki_step(const GaussianState& state, const InverseProblem& problem, const HyperParams& hp);

/// One extended Kalman inversion step; needs problem.jacobian.
GaussianState exki_step(const GaussianState& state, const InverseProblem& problem, const HyperParams& hp);

/// One ensemble Kalman inversion step: J forward evaluations. Noise is drawn
/// from rng in a fixed order: every omega (by particle), then every nu.
Ensemble eki_step(const Ensemble& ens, const InverseProblem& problem, const HyperParams& hp, Rng& rng);

/// Exact Kalman update for the linear map y = G theta.
GaussianState kalman_step(const GaussianState& state, const Matrix& G, const Vector& y, const HyperParams& hp);

enum class Method { Uki, Exki, Eki, Kf };

const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& name);

using RunInit = std::variant<GaussianState, Ensemble>;

struct RunResult {
    ConvergenceRecord initial;
    std::vector<ConvergenceRecord> history;  // iterations 1..k that completed
    GaussianState final_state;               // ensemble mean/covariance for EKI
    std::optional<Ensemble> final_ensemble;
    bool completed = false;
    std::optional<ErrorKind> error_kind;
    std::string error_message;
};

/// Iterates the chosen step map n_iters times against the fixed data y_obs.
/// Step errors stop the loop; the returned result then carries the records of
/// the iterations that completed together with the error. n_iters < 1 throws.
RunResult run(Method method, const InverseProblem& problem, const HyperParams& hp, const RunInit& init,
              int n_iters);

/// Observer invoked with the initial record and then after each completed iteration.
using RunObserver = std::function<void(const ConvergenceRecord&)>;
RunResult run(Method method, const InverseProblem& problem, const HyperParams& hp, const RunInit& init,
              int n_iters, const RunObserver& observer);

/// Gaussian-smoothed view of a scalar map at one grid point.
struct LandscapePoint {
    double r = 0.0;
    double averaged_value = 0.0;     // E[g(x)],            x ~ N(r, sigma_r^2)
    double averaged_gradient = 0.0;  // Cov[g(x), x] / sigma_r^2
};

std::vector<LandscapePoint> averaged_landscape_1d(const std::function<double(double)>& g,
                                                  std::span<const double> r_grid, double sigma_r,
                                                  int quad_order);

}  // namespace kalinv
