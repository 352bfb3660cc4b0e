#pragma once

#include "kalinv/problem.hpp"

#include <optional>
#include <string>

namespace kalinv::problems {

enum class Linear2Variant { NS, OD, UD };

std::optional<Linear2Variant> parse_linear2_variant(const std::string& name);
const char* to_string(Linear2Variant v);

/// Two-parameter linear systems: non-singular, over-determined and
/// under-determined. sigma_eta = 0.1^2 I; theta_ref is the exact solution, the
/// least-squares solution or the minimal-norm solution respectively.
InverseProblem linear2(Linear2Variant variant);

/// Square system G_ij = 1/(i+j-1), y = G 1, theta_ref = 1, sigma_eta = 0.1^2 I.
InverseProblem hilbert(Eigen::Index n_theta);

/// y = 1/(1 + exp(theta_1 + theta_2 x)) at x = 1/2 with y = 0.08, sigma_eta = 0.1^2.
/// Used with the prior N([1, 1], I).
InverseProblem logistic();

}  // namespace kalinv::problems
