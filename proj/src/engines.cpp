#include "kalinv/engines.hpp"

#include "kalinv/parallel.hpp"
#include "kalinv/quadrature.hpp"

#include <cmath>
#include <string>

namespace kalinv {

namespace {

// Factor used to sample N(0, cov); an exactly zero covariance yields a zero factor.
Matrix noise_factor(const Matrix& cov) {
    if (cov.isZero(0.0)) return Matrix::Zero(cov.rows(), cov.cols());
    return cholesky_psd(cov).lower;
}

Vector standard_normal(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    return z;
}

void check_hyperparams(const HyperParams& hp, Eigen::Index n_theta, Eigen::Index n_y) {
    if (hp.r0.size() != n_theta) throw DimensionMismatch("r0 length differs from n_theta");
    if (hp.sigma_omega.rows() != n_theta || hp.sigma_omega.cols() != n_theta) {
        throw DimensionMismatch("sigma_omega must be n_theta x n_theta");
    }
    if (hp.sigma_nu.rows() != n_y || hp.sigma_nu.cols() != n_y) {
        throw DimensionMismatch("sigma_nu must be n_y x n_y");
    }
}

bool is_positive_definite(const Matrix& m) {
    Eigen::LLT<Matrix> llt(symmetrize(m));
    return llt.info() == Eigen::Success;
}

}  // namespace

HyperParams HyperParams::standard(double alpha, const Vector& r0, double gamma, const Matrix& sigma_eta,
                                  std::optional<double> spread) {
    HyperParams hp;
    hp.alpha = alpha;
    hp.r0 = r0;
    hp.gamma = gamma;
    const Eigen::Index n = r0.size();
    hp.sigma_omega = (2.0 - alpha * alpha) * gamma * Matrix::Identity(n, n);
    hp.sigma_nu = 2.0 * sigma_eta;
    hp.spread_a = spread.value_or(default_spread(n));
    return hp;
}

void HyperParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0,1]");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (!(spread_a > 0.0)) throw InvalidArgument("spread_a must be positive");
    if (!is_positive_definite(sigma_omega)) throw InvalidArgument("sigma_omega must be positive definite");
    if (!is_positive_definite(sigma_nu)) throw InvalidArgument("sigma_nu must be positive definite");
}

Vector Ensemble::mean() const {
    Vector m = Vector::Zero(particles.front().size());
    for (const auto& p : particles) m += p;
    return m / static_cast<double>(particles.size());
}

Matrix Ensemble::covariance() const {
    const Vector m = mean();
    Matrix c = Matrix::Zero(m.size(), m.size());
    for (const auto& p : particles) {
        const Vector d = p - m;
        c.noalias() += d * d.transpose();
    }
    return symmetrize(c / static_cast<double>(particles.size() - 1));
}

Ensemble draw_ensemble(const GaussianState& state, std::size_t J, std::uint64_t seed) {
    if (J < 2) throw InvalidArgument("ensemble needs at least 2 particles");
    Rng rng(seed);
    const Matrix root = noise_factor(state.cov);
    Ensemble ens;
    ens.particles.reserve(J);
    for (std::size_t j = 0; j < J; ++j) ens.particles.push_back(state.mean + root * standard_normal(state.dim(), rng));
    ens.rng_seed = rng();
    return ens;
}

GaussianState predict(const GaussianState& state, const HyperParams& hp) {
    GaussianState out;
    out.mean = hp.alpha * state.mean + (1.0 - hp.alpha) * hp.r0;
    out.cov = symmetrize(hp.alpha * hp.alpha * state.cov + hp.sigma_omega);
    return out;
}

GaussianState uki_step(const GaussianState& state, const InverseProblem& problem, const HyperParams& hp) {
    check_hyperparams(hp, state.dim(), problem.n_y);
    const GaussianState prior = predict(state, hp);
    const SigmaPointSet points = sigma_points(prior, hp.spread_a);
    const std::vector<Vector> g = evaluate_all(problem.forward, points.points);
    const JointGaussian joint = unscented_joint(points, g, prior.cov, hp.sigma_nu);
    return gaussian_condition(joint, problem.y_obs);
}

GaussianState exki_step(const GaussianState& state, const InverseProblem& problem, const HyperParams& hp) {
    if (!problem.has_jacobian()) {
        throw JacobianUnavailable("problem '" + problem.name + "' supplies no jacobian");
    }
    check_hyperparams(hp, state.dim(), problem.n_y);
    const GaussianState prior = predict(state, hp);

    const Vector y_hat = problem.forward(prior.mean);
    if (!y_hat.allFinite()) throw ForwardModelFailure(0, "forward map returned non-finite values");
    const Matrix dg = problem.jacobian(prior.mean);
    if (dg.rows() != problem.n_y || dg.cols() != state.dim()) {
        throw DimensionMismatch("jacobian must be n_y x n_theta");
    }
    if (!dg.allFinite()) throw ForwardModelFailure(0, "jacobian has non-finite entries");

    JointGaussian joint;
    joint.mean_theta = prior.mean;
    joint.mean_y = y_hat;
    joint.cov_theta = prior.cov;
    joint.cov_theta_y = prior.cov * dg.transpose();
    joint.cov_yy = symmetrize(dg * prior.cov * dg.transpose() + hp.sigma_nu);
    return gaussian_condition(joint, problem.y_obs);
}

Ensemble eki_step(const Ensemble& ens, const InverseProblem& problem, const HyperParams& hp, Rng& rng) {
    const std::size_t J = ens.size();
    if (J < 2) throw InvalidArgument("EKI needs at least 2 particles");
    const Eigen::Index n_theta = ens.particles.front().size();
    check_hyperparams(hp, n_theta, problem.n_y);

    const Matrix omega_root = noise_factor(hp.sigma_omega);
    const Matrix nu_root = noise_factor(hp.sigma_nu);

    std::vector<Vector> predicted(J);
    for (std::size_t j = 0; j < J; ++j) {
        predicted[j] = hp.alpha * ens.particles[j] + (1.0 - hp.alpha) * hp.r0 +
                       omega_root * standard_normal(n_theta, rng);
    }
    std::vector<Vector> nu(J);
    for (std::size_t j = 0; j < J; ++j) nu[j] = nu_root * standard_normal(problem.n_y, rng);

    const std::vector<Vector> g = evaluate_all(problem.forward, predicted);

    const double inv_j = 1.0 / static_cast<double>(J);
    Vector m_hat = Vector::Zero(n_theta);
    Vector y_hat = Vector::Zero(problem.n_y);
    for (std::size_t j = 0; j < J; ++j) {
        m_hat += predicted[j];
        y_hat += g[j];
    }
    m_hat *= inv_j;
    y_hat *= inv_j;

    Matrix c_theta_y = Matrix::Zero(n_theta, problem.n_y);
    Matrix c_yy = Matrix::Zero(problem.n_y, problem.n_y);
    for (std::size_t j = 0; j < J; ++j) {
        const Vector dy = g[j] - y_hat;
        c_theta_y.noalias() += (predicted[j] - m_hat) * dy.transpose();
        c_yy.noalias() += dy * dy.transpose();
    }
    const double norm = 1.0 / static_cast<double>(J - 1);
    c_theta_y *= norm;
    c_yy = symmetrize(norm * c_yy + hp.sigma_nu);

    const Matrix gain = spd_solve(c_yy, c_theta_y.transpose()).transpose();

    Ensemble out;
    out.rng_seed = ens.rng_seed;
    out.particles.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
        out.particles[j] = predicted[j] + gain * (problem.y_obs - g[j] - nu[j]);
    }
    return out;
}

GaussianState kalman_step(const GaussianState& state, const Matrix& G, const Vector& y, const HyperParams& hp) {
    if (G.cols() != state.dim()) throw DimensionMismatch("G must have n_theta columns");
    if (G.rows() != y.size()) throw DimensionMismatch("G rows differ from observation length");
    check_hyperparams(hp, state.dim(), y.size());
    const GaussianState prior = predict(state, hp);
    JointGaussian joint;
    joint.mean_theta = prior.mean;
    joint.mean_y = G * prior.mean;
    joint.cov_theta = prior.cov;
    joint.cov_theta_y = prior.cov * G.transpose();
    joint.cov_yy = symmetrize(G * prior.cov * G.transpose() + hp.sigma_nu);
    return gaussian_condition(joint, y);
}

const char* to_string(Method m) {
    switch (m) {
        case Method::Uki: return "uki";
        case Method::Exki: return "exki";
        case Method::Eki: return "eki";
        case Method::Kf: return "kf";
    }
    return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
    if (name == "uki") return Method::Uki;
    if (name == "exki") return Method::Exki;
    if (name == "eki") return Method::Eki;
    if (name == "kf") return Method::Kf;
    return std::nullopt;
}

namespace {

ConvergenceRecord make_record(int iteration, const GaussianState& state, const InverseProblem& problem) {
    ConvergenceRecord rec;
    rec.iteration = iteration;
    rec.mean = state.mean;
    rec.cov_frobenius = state.cov.norm();
    const Vector g = problem.forward(state.mean);
    if (!g.allFinite()) throw ForwardModelFailure(0, "forward map returned non-finite values at the mean");
    rec.misfit = problem.misfit_of_prediction(g);
    if (problem.theta_ref) rec.param_error = (problem.physical(state.mean) - problem.physical(*problem.theta_ref)).norm();
    if (problem.field_error) rec.relative_field_error = problem.field_error(state.mean);
    return rec;
}

GaussianState summarize(const Ensemble& ens) { return {ens.mean(), ens.covariance()}; }

}  // namespace

RunResult run(Method method, const InverseProblem& problem, const HyperParams& hp, const RunInit& init,
              int n_iters) {
    return run(method, problem, hp, init, n_iters, RunObserver{});
}

RunResult run(Method method, const InverseProblem& problem, const HyperParams& hp, const RunInit& init,
              int n_iters, const RunObserver& observer) {
    if (n_iters < 1) throw InvalidArgument("n_iters must be at least 1");
    check_problem(problem);

    const bool ensemble_method = method == Method::Eki;
    if (ensemble_method != std::holds_alternative<Ensemble>(init)) {
        throw InvalidArgument(std::string("method ") + to_string(method) +
                              (ensemble_method ? " needs an ensemble initialization"
                                               : " needs a Gaussian initialization"));
    }
    if (method == Method::Kf && !problem.linear_operator) {
        throw InvalidArgument("method kf needs a linear problem");
    }

    RunResult result;
    GaussianState state;
    Ensemble ens;
    Rng rng;
    if (ensemble_method) {
        ens = std::get<Ensemble>(init);
        if (ens.size() < 2) throw InvalidArgument("ensemble needs at least 2 particles");
        rng.seed(ens.rng_seed);
        state = summarize(ens);
        result.final_ensemble = ens;
    } else {
        state = std::get<GaussianState>(init);
    }
    result.final_state = state;

    try {
        result.initial = make_record(0, state, problem);
        if (observer) observer(result.initial);
        for (int n = 1; n <= n_iters; ++n) {
            switch (method) {
                case Method::Uki: state = uki_step(state, problem, hp); break;
                case Method::Exki: state = exki_step(state, problem, hp); break;
                case Method::Kf: state = kalman_step(state, *problem.linear_operator, problem.y_obs, hp); break;
                case Method::Eki:
                    ens = eki_step(ens, problem, hp, rng);
                    state = summarize(ens);
                    break;
            }
            ConvergenceRecord rec = make_record(n, state, problem);
            result.final_state = state;
            if (ensemble_method) result.final_ensemble = ens;
            result.history.push_back(std::move(rec));
            if (observer) observer(result.history.back());
        }
        result.completed = true;
    } catch (const Error& e) {
        result.error_kind = e.kind();
        result.error_message = e.what();
    }
    return result;
}

std::vector<LandscapePoint> averaged_landscape_1d(const std::function<double(double)>& g,
                                                  std::span<const double> r_grid, double sigma_r,
                                                  int quad_order) {
    if (!(sigma_r > 0.0)) throw InvalidArgument("sigma_r must be positive");
    if (quad_order < 8) throw InvalidArgument("quad_order must be at least 8");

    const NormalQuadrature q = gauss_hermite_normal(quad_order);
    const std::size_t m = q.nodes.size();
    std::vector<double> values(r_grid.size() * m);
    parallel_for(values.size(), [&](std::size_t k) {
        const double x = r_grid[k / m] + sigma_r * q.nodes[k % m];
        const double v = g(x);
        if (!std::isfinite(v)) throw NonFiniteForwardValue("g(" + std::to_string(x) + ") is not finite");
        values[k] = v;
    });

    std::vector<LandscapePoint> out(r_grid.size());
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        double mean = 0.0;
        for (std::size_t k = 0; k < m; ++k) mean += q.weights[k] * values[i * m + k];
        double cov = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            cov += q.weights[k] * (values[i * m + k] - mean) * (sigma_r * q.nodes[k]);
        }
        out[i] = {r_grid[i], mean, cov / (sigma_r * sigma_r)};
    }
    return out;
}

}  // namespace kalinv
