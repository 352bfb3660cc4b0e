#pragma once

#include "kalinv/gaussian.hpp"

#include <functional>
#include <optional>
#include <string>

namespace kalinv {

using ForwardMap = std::function<Vector(const Vector&)>;
using JacobianMap = std::function<Matrix(const Vector&)>;
using ScalarField = std::function<double(const Vector&)>;

/// y = G(theta) + eta with eta ~ N(0, sigma_eta).
///
/// The forward map must be reentrant: engines may evaluate it concurrently on
/// different inputs.
struct InverseProblem {
    std::string name;
    Eigen::Index n_theta = 0;
    Eigen::Index n_y = 0;
    ForwardMap forward;
    JacobianMap jacobian;                    // empty when unavailable
    std::optional<Matrix> linear_operator;   // set for exactly linear problems
    Vector y_obs;
    Matrix sigma_eta;
    std::optional<Vector> theta_ref;
    ScalarField field_error;                 // empty when the problem defines none
    std::function<Vector(const Vector&)> to_physical;  // empty means identity

    bool has_jacobian() const { return static_cast<bool>(jacobian); }

    /// Parameters in the coordinates the forward model was written in.
    Vector physical(const Vector& theta) const { return to_physical ? to_physical(theta) : theta; }

    /// Phi(theta) = 1/2 |sigma_eta^{-1/2} (y - G(theta))|^2.
    double misfit(const Vector& theta) const;
    double misfit_of_prediction(const Vector& g_value) const;
};

/// Central differences with step 1e-6 * (1 + |theta_i|).
Matrix finite_difference_jacobian(const ForwardMap& forward, const Vector& theta);

/// Copy of `problem` whose jacobian is the central-difference approximation.
InverseProblem with_fd_jacobian(InverseProblem problem);

/// Throws DimensionMismatch unless the problem's declared sizes are consistent.
void check_problem(const InverseProblem& problem);

}  // namespace kalinv
