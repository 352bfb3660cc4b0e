#include "kalinv/problem.hpp"

#include "kalinv/errors.hpp"

#include <cmath>

namespace kalinv {

double InverseProblem::misfit_of_prediction(const Vector& g_value) const {
    const Vector r = y_obs - g_value;
    const Vector w = spd_solve(sigma_eta, r);
    return 0.5 * r.dot(w);
}

double InverseProblem::misfit(const Vector& theta) const { return misfit_of_prediction(forward(theta)); }

Matrix finite_difference_jacobian(const ForwardMap& forward, const Vector& theta) {
    const Eigen::Index n = theta.size();
    Matrix jac;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double step = 1e-6 * (1.0 + std::abs(theta(i)));
        Vector plus = theta;
        Vector minus = theta;
        plus(i) += step;
        minus(i) -= step;
        const Vector column = (forward(plus) - forward(minus)) / (2.0 * step);
        if (i == 0) jac.resize(column.size(), n);
        jac.col(i) = column;
    }
    return jac;
}

InverseProblem with_fd_jacobian(InverseProblem problem) {
    problem.jacobian = [forward = problem.forward](const Vector& theta) {
        return finite_difference_jacobian(forward, theta);
    };
    return problem;
}

void check_problem(const InverseProblem& problem) {
    if (!problem.forward) throw InvalidArgument("problem '" + problem.name + "' has no forward map");
    if (problem.y_obs.size() != problem.n_y) throw DimensionMismatch("y_obs length differs from n_y");
    if (problem.sigma_eta.rows() != problem.n_y || problem.sigma_eta.cols() != problem.n_y) {
        throw DimensionMismatch("sigma_eta must be n_y x n_y");
    }
    if (problem.theta_ref && problem.theta_ref->size() != problem.n_theta) {
        throw DimensionMismatch("theta_ref length differs from n_theta");
    }
    if (problem.linear_operator &&
        (problem.linear_operator->rows() != problem.n_y || problem.linear_operator->cols() != problem.n_theta)) {
        throw DimensionMismatch("linear operator must be n_y x n_theta");
    }
}

}  // namespace kalinv
