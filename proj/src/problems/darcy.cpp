#include "kalinv/problems/darcy.hpp"

#include "kalinv/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <tuple>

namespace kalinv::problems {

namespace {

constexpr int kLatticeMax = 32;

double node_coord(int i, int grid_n) { return static_cast<double>(i) / static_cast<double>(grid_n - 1); }

}  // namespace

KLField2D::KLField2D(int grid_n, int n_modes, double tau, double d) : grid_n_(grid_n) {
    if (grid_n < 3) throw InvalidArgument("KL grid needs at least 3 nodes per side");
    struct Entry {
        double lambda;
        int l1, l2;
    };
    std::vector<Entry> lattice;
    for (int l1 = 0; l1 <= kLatticeMax; ++l1) {
        for (int l2 = 0; l2 <= kLatticeMax; ++l2) {
            if (l1 == 0 && l2 == 0) continue;
            const double k2 = std::numbers::pi * std::numbers::pi * static_cast<double>(l1 * l1 + l2 * l2);
            lattice.push_back({std::pow(k2 + tau * tau, -d), l1, l2});
        }
    }
    if (n_modes < 1 || n_modes > static_cast<int>(lattice.size())) {
        throw InvalidArgument("n_modes must lie in [1, " + std::to_string(lattice.size()) + "]");
    }
    std::stable_sort(lattice.begin(), lattice.end(), [](const Entry& a, const Entry& b) {
        if (a.lambda != b.lambda) return a.lambda > b.lambda;
        return std::tie(a.l1, a.l2) < std::tie(b.l1, b.l2);
    });

    const int n_nodes = grid_n * grid_n;
    for (int k = 0; k < n_modes; ++k) {
        const Entry& e = lattice[static_cast<std::size_t>(k)];
        lambda_.push_back(e.lambda);
        index_.emplace_back(e.l1, e.l2);
        Vector psi(n_nodes);
        for (int j = 0; j < grid_n; ++j) {
            const double c2 = std::cos(std::numbers::pi * e.l2 * node_coord(j, grid_n));
            for (int i = 0; i < grid_n; ++i) {
                const double c1 = std::cos(std::numbers::pi * e.l1 * node_coord(i, grid_n));
                double v;
                if (e.l2 == 0) {
                    v = std::numbers::sqrt2 * c1;
                } else if (e.l1 == 0) {
                    v = std::numbers::sqrt2 * c2;
                } else {
                    v = 2.0 * c1 * c2;
                }
                psi(j * grid_n + i) = v;
            }
        }
        modes_.push_back(std::move(psi));
    }

    const double h = 1.0 / static_cast<double>(grid_n - 1);
    trap_weights_.resize(n_nodes);
    for (int j = 0; j < grid_n; ++j) {
        const double wj = (j == 0 || j == grid_n - 1) ? 0.5 : 1.0;
        for (int i = 0; i < grid_n; ++i) {
            const double wi = (i == 0 || i == grid_n - 1) ? 0.5 : 1.0;
            trap_weights_(j * grid_n + i) = wi * wj * h * h;
        }
    }
}

Vector KLField2D::log_field(const Vector& theta) const {
    if (theta.size() > n_modes()) throw DimensionMismatch("more coefficients than KL modes");
    Vector out = Vector::Zero(grid_n_ * grid_n_);
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        out += theta(k) * std::sqrt(lambda_[static_cast<std::size_t>(k)]) * modes_[static_cast<std::size_t>(k)];
    }
    return out;
}

double KLField2D::inner(const Vector& u, const Vector& v) const {
    return (trap_weights_.array() * u.array() * v.array()).sum();
}

double darcy_source(double x2) {
    if (x2 <= 4.0 / 6.0) return 1000.0;
    if (x2 <= 5.0 / 6.0) return 2000.0;
    return 3000.0;
}

namespace {

// Antiderivative of darcy_source from 0.
double source_integral(double x2) {
    constexpr double b1 = 4.0 / 6.0, b2 = 5.0 / 6.0;
    if (x2 <= b1) return 1000.0 * x2;
    if (x2 <= b2) return 1000.0 * b1 + 2000.0 * (x2 - b1);
    return 1000.0 * b1 + 2000.0 * (b2 - b1) + 3000.0 * (x2 - b2);
}

// Mean of the source over the control volume of a node.
double source_average(double x2, double h) {
    return (source_integral(x2 + 0.5 * h) - source_integral(x2 - 0.5 * h)) / h;
}

}  // namespace

Vector darcy_pressure(int grid_n, const Vector& log_a) {
    if (log_a.size() != grid_n * grid_n) throw DimensionMismatch("log-permeability must live on the node grid");
    const int m = grid_n - 2;  // interior nodes per side
    const double inv_h2 = static_cast<double>(grid_n - 1) * static_cast<double>(grid_n - 1);
    const Vector a = log_a.array().exp();
    auto node = [grid_n](int i, int j) { return j * grid_n + i; };
    auto unknown = [m](int i, int j) { return (j - 1) * m + (i - 1); };

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(5 * m * m));
    Vector rhs(m * m);
    constexpr int di[4] = {1, -1, 0, 0};
    constexpr int dj[4] = {0, 0, 1, -1};
    for (int j = 1; j <= m; ++j) {
        for (int i = 1; i <= m; ++i) {
            const int row = unknown(i, j);
            const double ac = a(node(i, j));
            double diag = 0.0;
            for (int s = 0; s < 4; ++s) {
                const int ni = i + di[s];
                const int nj = j + dj[s];
                const double face = 0.5 * (ac + a(node(ni, nj))) * inv_h2;
                diag += face;
                if (ni >= 1 && ni <= m && nj >= 1 && nj <= m) entries.emplace_back(row, unknown(ni, nj), -face);
            }
            entries.emplace_back(row, row, diag);
            rhs(row) = source_average(node_coord(j, grid_n), 1.0 / static_cast<double>(grid_n - 1));
        }
    }
    Eigen::SparseMatrix<double> A(m * m, m * m);
    A.setFromTriplets(entries.begin(), entries.end());

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw SolveFailure("sparse Cholesky factorization failed");
    const Vector p_int = solver.solve(rhs);
    const double residual = (A * p_int - rhs).norm() / rhs.norm();
    if (!(residual <= 1e-10)) {
        throw SolveFailure("pressure solve residual " + std::to_string(residual) + " exceeds 1e-10");
    }

    Vector p = Vector::Zero(grid_n * grid_n);
    for (int j = 1; j <= m; ++j) {
        for (int i = 1; i <= m; ++i) p(node(i, j)) = p_int(unknown(i, j));
    }
    return p;
}

double interpolate_nodal(int grid_n, const Vector& values, double x1, double x2) {
    const double scale = static_cast<double>(grid_n - 1);
    const double s1 = std::clamp(x1, 0.0, 1.0) * scale;
    const double s2 = std::clamp(x2, 0.0, 1.0) * scale;
    const int i = std::min(static_cast<int>(s1), grid_n - 2);
    const int j = std::min(static_cast<int>(s2), grid_n - 2);
    const double t1 = s1 - i;
    const double t2 = s2 - j;
    auto v = [&](int ii, int jj) { return values(jj * grid_n + ii); };
    return (1 - t1) * (1 - t2) * v(i, j) + t1 * (1 - t2) * v(i + 1, j) + (1 - t1) * t2 * v(i, j + 1) +
           t1 * t2 * v(i + 1, j + 1);
}

std::vector<std::pair<double, double>> darcy_observation_points() {
    std::vector<std::pair<double, double>> pts;
    for (int j = 1; j <= 7; ++j) {
        for (int i = 1; i <= 7; ++i) pts.emplace_back(i / 8.0, j / 8.0);
    }
    return pts;
}

InverseProblem darcy2d(const DarcyOptions& o) {
    if (o.grid_n < 16) throw InvalidArgument("darcy grid_n must be at least 16");
    if (o.n_theta < 1 || o.n_theta > o.n_modes_truth) throw InvalidArgument("darcy needs 1 <= n_theta <= n_modes_truth");

    const auto truth_field = std::make_shared<const KLField2D>(o.grid_n, o.n_modes_truth);
    const auto field = std::make_shared<const KLField2D>(o.grid_n, o.n_theta);

    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector theta_truth(o.n_modes_truth);
    for (Eigen::Index k = 0; k < theta_truth.size(); ++k) theta_truth(k) = normal(rng);
    const auto log_truth = std::make_shared<const Vector>(truth_field->log_field(theta_truth));

    const int grid_n = o.grid_n;
    const auto points = darcy_observation_points();
    auto observe = [grid_n, points](const Vector& log_a) {
        const Vector p = darcy_pressure(grid_n, log_a);
        Vector y(static_cast<Eigen::Index>(points.size()));
        for (std::size_t k = 0; k < points.size(); ++k) {
            y(static_cast<Eigen::Index>(k)) = interpolate_nodal(grid_n, p, points[k].first, points[k].second);
        }
        return y;
    };

    InverseProblem prob;
    prob.name = "darcy";
    prob.n_theta = o.n_theta;
    prob.n_y = static_cast<Eigen::Index>(points.size());
    prob.forward = [field, observe](const Vector& theta) -> Vector { return observe(field->log_field(theta)); };
    prob.y_obs = observe(*log_truth);
    prob.sigma_eta = Matrix::Identity(prob.n_y, prob.n_y);
    prob.theta_ref = theta_truth.head(o.n_theta);
    prob.field_error = [field, log_truth](const Vector& theta) {
        const Vector diff = field->log_field(theta) - *log_truth;
        return std::sqrt(field->inner(diff, diff) / field->inner(*log_truth, *log_truth));
    };
    return prob;
}

}  // namespace kalinv::problems
