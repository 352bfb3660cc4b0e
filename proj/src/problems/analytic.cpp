#include "kalinv/problems/analytic.hpp"

#include "kalinv/errors.hpp"

#include <cmath>

namespace kalinv::problems {

std::optional<Linear2Variant> parse_linear2_variant(const std::string& name) {
    if (name == "NS" || name == "ns") return Linear2Variant::NS;
    if (name == "OD" || name == "od") return Linear2Variant::OD;
    if (name == "UD" || name == "ud") return Linear2Variant::UD;
    return std::nullopt;
}

const char* to_string(Linear2Variant v) {
    switch (v) {
        case Linear2Variant::NS: return "NS";
        case Linear2Variant::OD: return "OD";
        case Linear2Variant::UD: return "UD";
    }
    return "?";
}

namespace {

InverseProblem linear_problem(std::string name, const Matrix& G, const Vector& y, const Matrix& sigma_eta,
                              const Vector& theta_ref) {
    InverseProblem p;
    p.name = std::move(name);
    p.n_theta = G.cols();
    p.n_y = G.rows();
    p.forward = [G](const Vector& theta) -> Vector { return G * theta; };
    p.jacobian = [G](const Vector&) -> Matrix { return G; };
    p.linear_operator = G;
    p.y_obs = y;
    p.sigma_eta = sigma_eta;
    p.theta_ref = theta_ref;
    return p;
}

}  // namespace

InverseProblem linear2(Linear2Variant variant) {
    Matrix G;
    Vector y;
    Vector ref(2);
    switch (variant) {
        case Linear2Variant::NS:
            G.resize(2, 2);
            G << 1, 2, 3, 4;
            y.resize(2);
            y << 3, 7;
            ref << 1, 1;
            break;
        case Linear2Variant::OD:
            G.resize(3, 2);
            G << 1, 2, 3, 4, 5, 6;
            y.resize(3);
            y << 3, 7, 10;
            ref << 1.0 / 3.0, 17.0 / 12.0;
            break;
        case Linear2Variant::UD:
            G.resize(1, 2);
            G << 1, 2;
            y.resize(1);
            y << 3;
            ref << 0.6, 1.2;
            break;
    }
    const Matrix sigma_eta = 0.01 * Matrix::Identity(G.rows(), G.rows());
    return linear_problem(std::string("linear2:") + to_string(variant), G, y, sigma_eta, ref);
}

InverseProblem hilbert(Eigen::Index n_theta) {
    if (n_theta < 1) throw InvalidArgument("hilbert needs n_theta >= 1");
    Matrix G(n_theta, n_theta);
    for (Eigen::Index i = 0; i < n_theta; ++i) {
        for (Eigen::Index j = 0; j < n_theta; ++j) G(i, j) = 1.0 / static_cast<double>(i + j + 1);
    }
    const Vector ones = Vector::Ones(n_theta);
    return linear_problem("hilbert:" + std::to_string(n_theta), G, G * ones,
                          0.01 * Matrix::Identity(n_theta, n_theta), ones);
}

InverseProblem logistic() {
    constexpr double x = 0.5;
    InverseProblem p;
    p.name = "logistic";
    p.n_theta = 2;
    p.n_y = 1;
    p.forward = [](const Vector& theta) -> Vector {
        return Vector::Constant(1, 1.0 / (1.0 + std::exp(theta(0) + theta(1) * x)));
    };
    p.jacobian = [](const Vector& theta) -> Matrix {
        const double e = std::exp(theta(0) + theta(1) * x);
        const double d = -e / ((1.0 + e) * (1.0 + e));
        Matrix j(1, 2);
        j << d, d * x;
        return j;
    };
    p.y_obs = Vector::Constant(1, 0.08);
    p.sigma_eta = Matrix::Constant(1, 1, 0.01);
    p.theta_ref = Vector::Constant(2, 2.0);
    return p;
}

}  // namespace kalinv::problems
