#include "kalinv/problems/transforms.hpp"

#include "kalinv/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace kalinv::problems {

Vector add_noise(const Vector& y_ref, double level, std::uint64_t seed) {
    if (!(level >= 0.0)) throw InvalidArgument("noise level must be non-negative");
    if (level == 0.0) return y_ref;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector y = y_ref;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += level * y_ref(i) * normal(rng);
    return y;
}

Constraint Constraint::box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) throw DimensionMismatch("box bounds differ in length");
    if (!((upper - lower).array() > 0.0).all()) throw InvalidArgument("box constraint needs lower < upper");
    Constraint c;
    c.kind = Kind::Box;
    c.lower = std::move(lower);
    c.upper = std::move(upper);
    return c;
}

Vector Constraint::apply(const Vector& t) const {
    if (kind == Kind::NonNegative) return t.cwiseAbs();
    return lower.array() + (upper - lower).array() / (1.0 + t.array().abs());
}

Vector Constraint::derivative(const Vector& t) const {
    Vector d(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double sign = t(i) < 0.0 ? -1.0 : 1.0;
        if (kind == Kind::NonNegative) {
            d(i) = sign;
        } else {
            const double q = 1.0 + std::abs(t(i));
            d(i) = -sign * (upper(i) - lower(i)) / (q * q);
        }
    }
    return d;
}

Vector Constraint::inverse(const Vector& theta) const {
    if (kind == Kind::NonNegative) return theta.cwiseAbs();
    return ((upper - lower).array() / (theta - lower).array() - 1.0).max(0.0);
}

InverseProblem constrain(const InverseProblem& problem, const Constraint& c) {
    if (c.kind == Constraint::Kind::Box && c.lower.size() != problem.n_theta) {
        throw DimensionMismatch("box bounds must have n_theta entries");
    }
    InverseProblem out = problem;
    const ForwardMap forward = problem.forward;
    out.forward = [forward, c](const Vector& t) { return forward(c.apply(t)); };
    if (problem.jacobian) {
        const JacobianMap jac = problem.jacobian;
        out.jacobian = [jac, c](const Vector& t) -> Matrix {
            return jac(c.apply(t)) * c.derivative(t).asDiagonal();
        };
    }
    out.linear_operator.reset();
    if (problem.theta_ref) out.theta_ref = c.inverse(*problem.theta_ref);
    if (problem.field_error) {
        const ScalarField fe = problem.field_error;
        out.field_error = [fe, c](const Vector& t) { return fe(c.apply(t)); };
    }
    const auto inner = problem.to_physical;
    out.to_physical = [inner, c](const Vector& t) { return inner ? inner(c.apply(t)) : c.apply(t); };
    return out;
}

void write_vector_csv(const std::filesystem::path& path, const std::string& header, const Vector& values) {
    std::ofstream f(path);
    if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
    f << header << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < values.size(); ++i) f << values(i) << '\n';
    if (!f) throw InvalidArgument("write to " + path.string() + " failed");
}

}  // namespace kalinv::problems
