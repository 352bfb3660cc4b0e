#pragma once

#include "kalinv/problem.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kalinv::problems {

/// dx/dt = f(x), written into the second argument.
using OdeRhs = std::function<void(const Vector&, Vector&)>;
using StateMoment = std::function<double(const Vector&)>;

/// Classical fourth-order Runge-Kutta step.
void rk4_step(const OdeRhs& rhs, Vector& x, double dt);

/// Overline operator: average of each moment over [spin_up, spin_up + window],
/// sampled after every integrator step.
struct TimeAverageSpec {
    double spin_up = 30.0;
    double window = 20.0;
    double dt = 0.01;
    std::vector<StateMoment> moments;

    void validate() const;
};

/// Integrates from x0 and returns the moment averages. Throws TrajectoryBlowup
/// once |x| exceeds blowup or turns non-finite.
Vector time_average(const OdeRhs& rhs, Vector x0, const TimeAverageSpec& spec, double blowup = 1e6);

/// Consecutive window averages after one spin-up: row w holds the averages
/// over [spin_up + w window, spin_up + (w+1) window].
Matrix window_averages(const OdeRhs& rhs, Vector x0, const TimeAverageSpec& spec, int n_windows,
                       double blowup = 1e6);

OdeRhs lorenz63_rhs(double sigma, double r, double beta);

enum class Lorenz63Variant { OneParam, ThreeParam };
std::optional<Lorenz63Variant> parse_lorenz63_variant(const std::string& name);

struct Lorenz63Options {
    Lorenz63Variant variant = Lorenz63Variant::OneParam;
    std::uint64_t seed = 0;
    double dt = 0.01;
    double spin_up = 30.0;
    double window = 20.0;
    int truth_windows = 10;  // truth series length = truth_windows * window
};

/// Initial state of the forward model (the truth run uses a different draw).
Vector lorenz63_forward_initial(std::uint64_t seed);
Vector lorenz63_truth_initial(std::uint64_t seed);

/// Truth data at (10, 28, 8/3). The one_param variant estimates r from the
/// average of x3; three_param estimates (sigma, r, beta) = |theta| from the
/// averages of x_i and x_i^2. sigma_eta is the sample covariance of the truth
/// window averages.
InverseProblem lorenz63(const Lorenz63Options& options);

/// r -> average of x3 with sigma = 10 and beta = 8/3, as used by the one_param forward map.
std::function<double(double)> lorenz63_x3_average(const Lorenz63Options& options);

/// Cubic Hermite closure on nodes {-20, -12, -4, 4, 12, 20}; theta holds
/// [value_0, slope_0, value_1, slope_1, ...]. x is clamped to [-20, 20].
double hermite_closure(const Vector& theta, double x);

/// Moment <X_k^power> of a slow variable (k is 1-based).
struct SlowMoment {
    int k = 1;
    int power = 1;
};

struct Lorenz96Options {
    int K = 8;
    int J = 32;
    double F = 20.0;
    double c = 10.0;
    double b = 10.0;
    double h = 1.0;
    double dt = 5e-3;
    double spin_up = 20.0;
    double window = 1000.0;
    std::uint64_t seed = 0;
    double noise_level = 0.0;
    /// Empty means first moments of X_1..X_4 followed by their second moments.
    std::vector<SlowMoment> moments;

    std::vector<SlowMoment> resolved_moments() const;
};

/// Full two-scale system; the state is [X_1..X_K, Y ring of length J K] with
/// Y^(j,k) at index K + (k-1) J + (j-1).
OdeRhs lorenz96_full_rhs(const Lorenz96Options& options);

/// Single-scale system with closure psi(X_k) = hermite_closure(theta, X_k).
OdeRhs lorenz96_reduced_rhs(const Lorenz96Options& options, const Vector& theta);

/// Time-averaged moments of the full system from its seeded initial state.
Vector lorenz96_truth_moments(const Lorenz96Options& options);

/// Time-averaged moments of the reduced system from its seeded initial state.
Vector lorenz96_reduced_moments(const Lorenz96Options& options, const Vector& theta);

/// Closure learning problem with N_theta = 12, sigma_eta = diag(0.05^2 y_obs^2)
/// computed after noise_level is applied to the truth moments.
InverseProblem lorenz96_multiscale(const Lorenz96Options& options);

}  // namespace kalinv::problems
