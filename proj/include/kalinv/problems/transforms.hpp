#pragma once

#include "kalinv/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace kalinv::problems {

/// y_obs = y_ref + (level * y_ref) .* xi with xi ~ N(0, I) drawn from seed.
Vector add_noise(const Vector& y_ref, double level, std::uint64_t seed);

/// Element-wise reparameterization theta = phi(theta_tilde).
struct Constraint {
    enum class Kind { NonNegative, Box };
    Kind kind = Kind::NonNegative;
    Vector lower;  // Box only
    Vector upper;

    static Constraint nonnegative() { return {}; }
    static Constraint box(Vector lower, Vector upper);

    /// |t| for NonNegative, lower + (upper - lower) / (1 + |t|) for Box.
    Vector apply(const Vector& t) const;
    /// Diagonal of d phi / d t (the subgradient at 0 is taken as +1 / -(upper - lower)).
    Vector derivative(const Vector& t) const;
    /// Non-negative preimage of theta.
    Vector inverse(const Vector& theta) const;
};

/// Wraps forward as G o phi; the jacobian (when present) follows the chain
/// rule, theta_ref is pulled back through the inverse and field_error and
/// to_physical are composed with phi.
InverseProblem constrain(const InverseProblem& problem, const Constraint& constraint);

/// One header row followed by one value per line, 17 significant digits.
void write_vector_csv(const std::filesystem::path& path, const std::string& header, const Vector& values);

}  // namespace kalinv::problems
