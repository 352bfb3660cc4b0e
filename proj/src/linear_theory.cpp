#include "kalinv/linear_theory.hpp"

#include "kalinv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kalinv::theory {

HyperParams LinearProblemSpec::hyperparams() const {
    HyperParams hp;
    hp.alpha = alpha;
    hp.r0 = r0;
    hp.sigma_omega = sigma_omega;
    hp.sigma_nu = sigma_nu;
    hp.spread_a = default_spread(n_theta());
    return hp;
}

void LinearProblemSpec::check() const {
    const Eigen::Index nt = n_theta();
    const Eigen::Index ny = n_y();
    if (y.size() != ny) throw DimensionMismatch("y length differs from rows of G");
    if (r0.size() != nt) throw DimensionMismatch("r0 length differs from columns of G");
    if (sigma_nu.rows() != ny || sigma_nu.cols() != ny) throw DimensionMismatch("sigma_nu must be n_y x n_y");
    if (sigma_omega.rows() != nt || sigma_omega.cols() != nt) {
        throw DimensionMismatch("sigma_omega must be n_theta x n_theta");
    }
}

namespace {

Matrix spd_inverse(const Matrix& a) { return spd_solve(a, Matrix::Identity(a.rows(), a.cols())); }

Matrix information(const LinearProblemSpec& spec) {
    return symmetrize(spec.G.transpose() * spd_solve(spec.sigma_nu, spec.G));
}

}  // namespace

SteadyState solve_steady_covariance(const LinearProblemSpec& spec, double c0_scale) {
    spec.check();
    const Eigen::Index n = spec.n_theta();
    const Matrix info = information(spec);
    const double a2 = spec.alpha * spec.alpha;

    Matrix c = c0_scale * Matrix::Identity(n, n);
    constexpr int max_iterations = 100000;
    for (int it = 1; it <= max_iterations; ++it) {
        const Matrix c_hat = symmetrize(a2 * c + spec.sigma_omega);
        const Matrix next = symmetrize(spd_inverse(symmetrize(info + spd_inverse(c_hat))));
        const double change = (next - c).norm();
        c = next;
        if (change < 1e-13 * std::max(1.0, c.norm())) {
            SteadyState s;
            s.c_inf = c;
            s.c_hat_inf = symmetrize(a2 * c + spec.sigma_omega);
            s.m_inf = minimize_phi_r(spec, s.c_hat_inf);
            s.iterations_to_converge = it;
            return s;
        }
    }
    throw NoConvergence("precision recursion did not settle within 1e5 iterations (|C|_F = " +
                        std::to_string(c.norm()) + ")");
}

double steady_state_residual(const LinearProblemSpec& spec, const Matrix& c_inf) {
    const double a2 = spec.alpha * spec.alpha;
    const Matrix r = spd_inverse(c_inf) - information(spec) - spd_inverse(symmetrize(a2 * c_inf + spec.sigma_omega));
    return r.norm();
}

double phi_r(const LinearProblemSpec& spec, const Matrix& c_hat_inf, const Vector& theta) {
    const Vector misfit = spec.y - spec.G * theta;
    const Vector dev = theta - spec.r0;
    return 0.5 * misfit.dot(spd_solve(spec.sigma_nu, misfit).col(0)) +
           0.5 * (1.0 - spec.alpha) * dev.dot(spd_solve(c_hat_inf, dev).col(0));
}

Vector minimize_phi_r(const LinearProblemSpec& spec, const Matrix& c_hat_inf) {
    spec.check();
    const Matrix c_hat_inv = spd_inverse(c_hat_inf);
    const Matrix normal = symmetrize(information(spec) + (1.0 - spec.alpha) * c_hat_inv);
    const Vector rhs = spec.G.transpose() * spd_solve(spec.sigma_nu, spec.y) + (1.0 - spec.alpha) * c_hat_inv * spec.r0;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(normal);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lo > 1e-13 * hi)) {
        throw SingularNormalEquations("normal matrix eigenvalue range [" + std::to_string(lo) + ", " +
                                      std::to_string(hi) + "]");
    }
    Eigen::LLT<Matrix> llt(normal);
    if (llt.info() != Eigen::Success) throw SingularNormalEquations("normal matrix is not positive definite");
    return llt.solve(rhs);
}

Vector phi_r_gradient_fd(const LinearProblemSpec& spec, const Matrix& c_hat_inf, const Vector& theta, double step) {
    Vector grad(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Vector plus = theta;
        Vector minus = theta;
        plus(i) += step;
        minus(i) -= step;
        grad(i) = (phi_r(spec, c_hat_inf, plus) - phi_r(spec, c_hat_inf, minus)) / (2.0 * step);
    }
    return grad;
}

Matrix sqrt_spd(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a));
    return eig.operatorSqrt();
}

Matrix inv_sqrt_spd(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a));
    return eig.operatorInverseSqrt();
}

Matrix pseudo_inverse_sym(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a));
    const Vector& lambda = eig.eigenvalues();
    const double cutoff = 1e-12 * lambda.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda(i)) > cutoff) inv(i) = 1.0 / lambda(i);
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

AlgebraicLawReport algebraic_law_check(const Matrix& G, const Matrix& sigma_nu, const Matrix& C0, const Vector& m0,
                                       const Vector& y, int n_max) {
    const Eigen::Index n_theta = G.cols();
    if (C0.rows() != n_theta || m0.size() != n_theta) throw DimensionMismatch("C0/m0 must match columns of G");

    const Matrix c0_half = sqrt_spd(C0);
    const Matrix c0_inv_half = inv_sqrt_spd(C0);
    const Matrix g_prime = G * c0_half;
    const Matrix S = symmetrize(g_prime.transpose() * spd_solve(sigma_nu, g_prime));
    const Vector m0_prime = c0_inv_half * m0;
    const Vector data_term = g_prime.transpose() * spd_solve(sigma_nu, y);
    const Matrix P = S * pseudo_inverse_sym(S);
    const Matrix I = Matrix::Identity(n_theta, n_theta);

    HyperParams hp;
    hp.alpha = 1.0;
    hp.r0 = Vector::Zero(n_theta);
    hp.sigma_omega = Matrix::Zero(n_theta, n_theta);
    hp.sigma_nu = sigma_nu;

    AlgebraicLawReport report;
    report.S = S;
    GaussianState state{m0, C0};
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) state = kalman_step(state, G, y, hp);
        const Matrix c_prime = symmetrize(c0_inv_half * state.cov * c0_inv_half);
        const Vector m_prime = c0_inv_half * state.mean;
        const Matrix law = I + static_cast<double>(n) * S;
        const Vector rhs = m0_prime + static_cast<double>(n) * data_term;

        AlgebraicLawStep step;
        step.n = n;
        step.covariance_residual = (c_prime * law - I).norm();
        step.mean_residual = (law * m_prime - rhs).norm() / std::max(1.0, rhs.norm());
        if (n > 0) {
            const Matrix c_prime_inv = spd_solve(c_prime, I);
            step.collapse_error = (P * c_prime_inv / static_cast<double>(n) - S).norm();
        }
        report.max_covariance_residual = std::max(report.max_covariance_residual, step.covariance_residual);
        report.max_mean_residual = std::max(report.max_mean_residual, step.mean_residual);
        report.steps.push_back(step);
    }
    return report;
}

DivergenceReport divergence_bound_check(const LinearProblemSpec& spec, const Matrix& C0, const Vector& m0, int n_max) {
    spec.check();
    if (spec.alpha != 1.0) throw InvalidArgument("divergence bound check requires alpha = 1");
    const HyperParams hp = spec.hyperparams();

    DivergenceReport report;
    report.min_margin = std::numeric_limits<double>::infinity();
    GaussianState state{m0, C0};
    std::vector<double> increments;
    for (int n = 1; n <= n_max; ++n) {
        const Vector previous = state.mean;
        state = kalman_step(state, spec.G, spec.y, hp);
        const Matrix bound = C0 + static_cast<double>(n) * spec.sigma_omega;
        Eigen::SelfAdjointEigenSolver<Matrix> margin_eig(symmetrize(bound - state.cov), Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Matrix> bound_eig(symmetrize(bound), Eigen::EigenvaluesOnly);

        DivergenceStep step;
        step.n = n;
        step.min_eig_margin = margin_eig.eigenvalues().minCoeff();
        step.bound_eig_range = bound_eig.eigenvalues().maxCoeff() - bound_eig.eigenvalues().minCoeff();
        step.cov_frobenius = state.cov.norm();
        step.mean_increment = (state.mean - previous).norm();
        step.mean = state.mean;
        report.min_margin = std::min(report.min_margin, step.min_eig_margin);
        increments.push_back(step.mean_increment);
        report.steps.push_back(std::move(step));
    }
    report.final_mean = state.mean;
    report.covariance_grows = report.steps.back().cov_frobenius > 10.0 * report.steps.front().cov_frobenius;
    report.mean_increment_rate = fit_log_rate(increments, 1);
    return report;
}

double fit_log_rate(std::span<const double> errors, std::size_t first) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t n = first; n < errors.size(); ++n) {
        if (!(errors[n] > 0.0) || !std::isfinite(errors[n])) continue;
        const double x = static_cast<double>(n);
        const double y = std::log(errors[n]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) return 0.0;
    const double denom = count * sxx - sx * sx;
    return (count * sxy - sx * sy) / denom;
}

}  // namespace kalinv::theory
