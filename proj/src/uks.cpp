#include "kalinv/uks.hpp"

#include "kalinv/errors.hpp"
#include "kalinv/parallel.hpp"

#include <cmath>
#include <random>
#include <string>

namespace kalinv {

double BayesianSpec::negative_log_density(const Vector& theta) const {
    const Vector r = y - forward(theta);
    const Vector d = theta - r0;
    return 0.5 * r.dot(spd_solve(sigma_eta, r).col(0)) + 0.5 * d.dot(spd_solve(prior_cov, d).col(0));
}

BayesianSpec bayesian_from(const InverseProblem& problem, const Vector& r0, const Matrix& prior_cov) {
    return {r0, prior_cov, problem.forward, problem.y_obs, problem.sigma_eta};
}

GaussianState linear_gaussian_posterior(const Matrix& G, const Matrix& sigma_eta, const Vector& y, const Vector& r0,
                                        const Matrix& prior_cov) {
    const Matrix I = Matrix::Identity(r0.size(), r0.size());
    const Matrix prior_prec = spd_solve(prior_cov, I);
    const Matrix precision = symmetrize(prior_prec + G.transpose() * spd_solve(sigma_eta, G));
    const Matrix cov = symmetrize(spd_solve(precision, I));
    const Vector mean = cov * (G.transpose() * spd_solve(sigma_eta, y) + prior_prec * r0);
    return {mean, cov};
}

GaussianState uks_step(const GaussianState& state, const BayesianSpec& spec, double h, std::optional<double> spread) {
    if (!(h > 0.0)) throw InvalidArgument("time step must be positive");
    if (!(h < 0.5)) throw UnstableStep("time step h = " + std::to_string(h) + " violates h < 1/2");
    const Eigen::Index n = state.dim();

    const SigmaPointSet points = sigma_points(state, spread.value_or(default_spread(n)));
    const std::vector<Vector> g = evaluate_all(spec.forward, points.points);
    const Eigen::Index n_y = g[0].size();
    // Only the cross covariance and the center value are needed; noise enters through sigma_eta below.
    const JointGaussian joint = unscented_joint(points, g, state.cov, Matrix::Zero(n_y, n_y));

    const Matrix I = Matrix::Identity(n, n);
    const Matrix c_prior_inv = spd_solve(spec.prior_cov, state.cov).transpose();  // C_n P^{-1}
    const Matrix cross_gain = spd_solve(spec.sigma_eta, joint.cov_theta_y.transpose()).transpose();  // C^{ty} E^{-1}

    const Vector rhs = state.mean + h * (cross_gain * (spec.y - joint.mean_y) + c_prior_inv * spec.r0);
    const Matrix lhs = I + h * c_prior_inv;
    GaussianState out;
    out.mean = lhs.partialPivLu().solve(rhs);

    const Matrix drift = cross_gain * joint.cov_theta_y.transpose() + c_prior_inv * state.cov;
    out.cov = symmetrize((state.cov - 2.0 * h * drift) / (1.0 - 2.0 * h));

    if (!out.mean.allFinite() || !out.cov.allFinite()) throw UnstableStep("state became non-finite");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(out.cov, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (lo < -1e-12 * std::max(hi, 1e-300) || (lo == 0.0 && hi == 0.0)) {
        throw UnstableStep("covariance lost positive semidefiniteness (min eigenvalue " + std::to_string(lo) + ")");
    }
    return out;
}

UksResult run_uks(const BayesianSpec& spec, const GaussianState& init, double h, double t_end,
                  const std::optional<GaussianState>& reference, long record_every, std::optional<double> spread) {
    if (t_end < 0.0) throw InvalidArgument("t_end must be non-negative");
    if (!(h > 0.0)) throw InvalidArgument("time step must be positive");
    if (record_every < 1) record_every = 1;

    const long n_steps = t_end == 0.0 ? 0 : static_cast<long>(std::ceil(t_end / h - 1e-9));
    UksResult result;
    GaussianState state = init;
    result.final_state = state;

    auto record = [&](long step) {
        UksRecord r;
        r.step = step;
        r.time = static_cast<double>(step) * h;
        r.mean = state.mean;
        r.cov_frobenius = state.cov.norm();
        if (reference) {
            r.mean_error = (state.mean - reference->mean).norm();
            r.cov_error = (state.cov - reference->cov).norm();
        }
        result.history.push_back(std::move(r));
    };

    try {
        for (long k = 1; k <= n_steps; ++k) {
            state = uks_step(state, spec, h, spread);
            result.final_state = state;
            result.steps_taken = k;
            if (k % record_every == 0 || k == n_steps) record(k);
        }
        result.completed = true;
    } catch (const Error& e) {
        result.error_kind = e.kind();
        result.error_message = e.what();
    }
    return result;
}

MetropolisResult rw_metropolis(const BayesianSpec& spec, long n_samples, double step_size, long burn_in,
                               std::uint64_t seed) {
    if (n_samples <= burn_in) throw InvalidArgument("n_samples must exceed burn_in");
    if (burn_in < 0) throw InvalidArgument("burn_in must be non-negative");
    const Eigen::Index n = spec.n_theta();
    const Matrix root = step_size * cholesky_psd(spec.prior_cov).lower;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const Eigen::LLT<Matrix> noise_llt(spec.sigma_eta);
    const Eigen::LLT<Matrix> prior_llt(spec.prior_cov);
    if (noise_llt.info() != Eigen::Success || prior_llt.info() != Eigen::Success) {
        throw FactorizationFailed("posterior covariances must be positive definite");
    }
    auto nld = [&](const Vector& theta) {
        const Vector r = noise_llt.matrixL().solve(spec.y - spec.forward(theta));
        const Vector d = prior_llt.matrixL().solve(theta - spec.r0);
        return 0.5 * (r.squaredNorm() + d.squaredNorm());
    };

    Vector current = spec.r0;
    double current_nld = nld(current);
    Vector z(n);

    const long kept = n_samples - burn_in;
    constexpr long n_batches = 50;
    const long batch_len = std::max(1L, kept / n_batches);
    Matrix batch_sums = Matrix::Zero(n, n_batches);
    std::vector<long> batch_counts(n_batches, 0);

    // Welford accumulation of mean and scatter.
    Vector mean = Vector::Zero(n);
    Matrix scatter = Matrix::Zero(n, n);
    long count = 0;
    long accepted = 0;

    for (long s = 0; s < n_samples; ++s) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
        const Vector proposal = current + root * z;
        const double proposal_nld = nld(proposal);
        const double log_ratio = current_nld - proposal_nld;
        if (std::isfinite(proposal_nld) && (log_ratio >= 0.0 || std::log(uniform(rng)) < log_ratio)) {
            current = proposal;
            current_nld = proposal_nld;
            ++accepted;
        }
        if (s < burn_in) continue;

        ++count;
        const Vector delta = current - mean;
        mean += delta / static_cast<double>(count);
        scatter.noalias() += delta * (current - mean).transpose();

        const long b = std::min(n_batches - 1, (count - 1) / batch_len);
        batch_sums.col(b) += current;
        ++batch_counts[static_cast<std::size_t>(b)];
    }

    MetropolisResult out;
    out.mean = mean;
    out.cov = symmetrize(scatter / static_cast<double>(count - 1));
    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(n_samples);
    out.n_kept = count;

    Vector sq = Vector::Zero(n);
    int used = 0;
    for (long b = 0; b < n_batches; ++b) {
        if (batch_counts[static_cast<std::size_t>(b)] == 0) continue;
        const Vector bm = batch_sums.col(b) / static_cast<double>(batch_counts[static_cast<std::size_t>(b)]);
        sq += (bm - mean).cwiseAbs2();
        ++used;
    }
    out.mean_standard_error = used > 1 ? Vector((sq / static_cast<double>(used - 1) / static_cast<double>(used)).cwiseSqrt())
                                       : Vector::Constant(n, std::numeric_limits<double>::infinity());
    return out;
}

}  // namespace kalinv
