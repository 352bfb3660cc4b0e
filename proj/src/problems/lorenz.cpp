#include "kalinv/problems/lorenz.hpp"

#include "kalinv/errors.hpp"
#include "kalinv/problems/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace kalinv::problems {

namespace {

struct Rk4 {
    Vector k1, k2, k3, k4, tmp;

    void step(const OdeRhs& rhs, Vector& x, double dt) {
        rhs(x, k1);
        tmp = x + 0.5 * dt * k1;
        rhs(tmp, k2);
        tmp = x + 0.5 * dt * k2;
        rhs(tmp, k3);
        tmp = x + dt * k3;
        rhs(tmp, k4);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

long step_count(double span, double dt) { return std::lround(span / dt); }

void guard(const Vector& x, double blowup, double t) {
    const double n = x.norm();
    if (!std::isfinite(n) || n > blowup) {
        throw TrajectoryBlowup("state norm " + std::to_string(n) + " at t = " + std::to_string(t));
    }
}

Vector moments_of(const std::vector<StateMoment>& moments, const Vector& x) {
    Vector m(static_cast<Eigen::Index>(moments.size()));
    for (std::size_t i = 0; i < moments.size(); ++i) m(static_cast<Eigen::Index>(i)) = moments[i](x);
    return m;
}

Vector gaussian_vector(std::mt19937_64& rng, Eigen::Index n, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

}  // namespace

void rk4_step(const OdeRhs& rhs, Vector& x, double dt) {
    Rk4 w;
    w.step(rhs, x, dt);
}

void TimeAverageSpec::validate() const {
    if (!(window > 0.0)) throw InvalidArgument("time-average window must be positive");
    if (!(spin_up >= 0.0)) throw InvalidArgument("spin-up must be non-negative");
    if (!(dt > 0.0)) throw InvalidArgument("integrator step must be positive");
    if (moments.empty()) throw InvalidArgument("time average needs at least one moment");
}

Matrix window_averages(const OdeRhs& rhs, Vector x, const TimeAverageSpec& spec, int n_windows, double blowup) {
    spec.validate();
    if (n_windows < 1) throw InvalidArgument("need at least one window");
    Rk4 w;
    const long n_spin = step_count(spec.spin_up, spec.dt);
    const long n_win = std::max(1L, step_count(spec.window, spec.dt));
    for (long s = 0; s < n_spin; ++s) {
        w.step(rhs, x, spec.dt);
        if (s % 64 == 0) guard(x, blowup, s * spec.dt);
    }
    guard(x, blowup, n_spin * spec.dt);

    Matrix out(n_windows, static_cast<Eigen::Index>(spec.moments.size()));
    for (int win = 0; win < n_windows; ++win) {
        Vector acc = Vector::Zero(out.cols());
        for (long s = 0; s < n_win; ++s) {
            w.step(rhs, x, spec.dt);
            if (s % 64 == 0) guard(x, blowup, spec.spin_up + (win * n_win + s) * spec.dt);
            acc += moments_of(spec.moments, x);
        }
        guard(x, blowup, spec.spin_up + (win + 1) * spec.window);
        out.row(win) = (acc / static_cast<double>(n_win)).transpose();
    }
    return out;
}

Vector time_average(const OdeRhs& rhs, Vector x0, const TimeAverageSpec& spec, double blowup) {
    return window_averages(rhs, std::move(x0), spec, 1, blowup).row(0).transpose();
}

OdeRhs lorenz63_rhs(double sigma, double r, double beta) {
    return [sigma, r, beta](const Vector& x, Vector& dx) {
        dx.resize(3);
        dx(0) = sigma * (x(1) - x(0));
        dx(1) = x(0) * (r - x(2)) - x(1);
        dx(2) = x(0) * x(1) - beta * x(2);
    };
}

std::optional<Lorenz63Variant> parse_lorenz63_variant(const std::string& name) {
    if (name == "one_param") return Lorenz63Variant::OneParam;
    if (name == "three_param") return Lorenz63Variant::ThreeParam;
    return std::nullopt;
}

Vector lorenz63_truth_initial(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return gaussian_vector(rng, 3, 1.0);
}

Vector lorenz63_forward_initial(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    rng.discard(1000);
    return gaussian_vector(rng, 3, 1.0);
}

namespace {

std::vector<StateMoment> lorenz63_moments(Lorenz63Variant v) {
    if (v == Lorenz63Variant::OneParam) return {[](const Vector& x) { return x(2); }};
    std::vector<StateMoment> m;
    for (int i = 0; i < 3; ++i) m.push_back([i](const Vector& x) { return x(i); });
    for (int i = 0; i < 3; ++i) m.push_back([i](const Vector& x) { return x(i) * x(i); });
    return m;
}

TimeAverageSpec lorenz63_spec(const Lorenz63Options& o) {
    return {o.spin_up, o.window, o.dt, lorenz63_moments(o.variant)};
}

}  // namespace

InverseProblem lorenz63(const Lorenz63Options& o) {
    constexpr double sigma_true = 10.0;
    constexpr double r_true = 28.0;
    constexpr double beta_true = 8.0 / 3.0;
    if (o.truth_windows < 2) throw InvalidArgument("lorenz63 needs at least two truth windows");

    const TimeAverageSpec spec = lorenz63_spec(o);
    const Matrix windows =
        window_averages(lorenz63_rhs(sigma_true, r_true, beta_true), lorenz63_truth_initial(o.seed), spec,
                        o.truth_windows);
    const Vector y = windows.colwise().mean().transpose();
    const Matrix centered = windows.rowwise() - y.transpose();
    const Matrix sigma_eta = (centered.transpose() * centered) / static_cast<double>(windows.rows() - 1);

    const Vector x0 = lorenz63_forward_initial(o.seed);
    InverseProblem p;
    p.y_obs = y;
    p.sigma_eta = sigma_eta;
    p.n_y = y.size();
    if (o.variant == Lorenz63Variant::OneParam) {
        p.name = "lorenz63:one_param";
        p.n_theta = 1;
        p.forward = [spec, x0](const Vector& theta) -> Vector {
            return time_average(lorenz63_rhs(sigma_true, theta(0), beta_true), x0, spec);
        };
        p.theta_ref = Vector::Constant(1, r_true);
        return p;
    }
    p.name = "lorenz63:three_param";
    p.n_theta = 3;
    p.forward = [spec, x0](const Vector& theta) -> Vector {
        return time_average(lorenz63_rhs(theta(0), theta(1), theta(2)), x0, spec);
    };
    p.theta_ref = Vector(3);
    *p.theta_ref << sigma_true, r_true, beta_true;
    return constrain(p, Constraint::nonnegative());
}

std::function<double(double)> lorenz63_x3_average(const Lorenz63Options& options) {
    Lorenz63Options o = options;
    o.variant = Lorenz63Variant::OneParam;
    const TimeAverageSpec spec = lorenz63_spec(o);
    const Vector x0 = lorenz63_forward_initial(o.seed);
    return [spec, x0](double r) { return time_average(lorenz63_rhs(10.0, r, 8.0 / 3.0), x0, spec)(0); };
}

double hermite_closure(const Vector& theta, double x) {
    constexpr std::array<double, 6> nodes = {-20.0, -12.0, -4.0, 4.0, 12.0, 20.0};
    constexpr double len = 8.0;
    if (theta.size() != 12) throw DimensionMismatch("hermite closure expects 12 coefficients");
    const double xc = std::clamp(x, nodes.front(), nodes.back());
    const int e = std::min(4, static_cast<int>((xc - nodes.front()) / len));
    const double t = (xc - nodes[static_cast<std::size_t>(e)]) / len;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * theta(2 * e) + len * h10 * theta(2 * e + 1) + h01 * theta(2 * e + 2) +
           len * h11 * theta(2 * e + 3);
}

std::vector<SlowMoment> Lorenz96Options::resolved_moments() const {
    if (!moments.empty()) return moments;
    std::vector<SlowMoment> m;
    for (int p = 1; p <= 2; ++p) {
        for (int k = 1; k <= 4; ++k) m.push_back({k, p});
    }
    return m;
}

namespace {

void check_l96(const Lorenz96Options& o) {
    if (o.K < 4 || o.J < 3) throw InvalidArgument("lorenz96 needs K >= 4 and J >= 3");
    for (const SlowMoment& m : o.resolved_moments()) {
        if (m.k < 1 || m.k > o.K || m.power < 1) throw InvalidArgument("lorenz96 moment index out of range");
    }
}

TimeAverageSpec l96_spec(const Lorenz96Options& o) {
    TimeAverageSpec spec;
    spec.spin_up = o.spin_up;
    spec.window = o.window;
    spec.dt = o.dt;
    for (const SlowMoment& m : o.resolved_moments()) {
        const Eigen::Index idx = m.k - 1;
        const int power = m.power;
        spec.moments.push_back([idx, power](const Vector& x) { return std::pow(x(idx), power); });
    }
    return spec;
}

}  // namespace

OdeRhs lorenz96_full_rhs(const Lorenz96Options& o) {
    const int K = o.K;
    const int J = o.J;
    const double F = o.F;
    const double coupling = o.h * o.c / o.b;
    const double cb = o.c * o.b;
    const double c = o.c;
    return [=](const Vector& s, Vector& ds) {
        const int n_y = J * K;
        ds.resize(K + n_y);
        auto X = [&](int k) { return s(((k % K) + K) % K); };
        auto Y = [&](int i) { return s(K + ((i % n_y) + n_y) % n_y); };
        for (int k = 0; k < K; ++k) {
            double ysum = 0.0;
            for (int j = 0; j < J; ++j) ysum += s(K + k * J + j);
            ds(k) = -X(k - 1) * (X(k - 2) - X(k + 1)) - X(k) + F - coupling * ysum;
        }
        for (int i = 0; i < n_y; ++i) {
            ds(K + i) = -cb * Y(i + 1) * (Y(i + 2) - Y(i - 1)) - c * Y(i) + coupling * X(i / J);
        }
    };
}

OdeRhs lorenz96_reduced_rhs(const Lorenz96Options& o, const Vector& theta) {
    const int K = o.K;
    const double F = o.F;
    return [K, F, theta](const Vector& s, Vector& ds) {
        ds.resize(K);
        auto X = [&](int k) { return s(((k % K) + K) % K); };
        for (int k = 0; k < K; ++k) {
            ds(k) = -X(k - 1) * (X(k - 2) - X(k + 1)) - X(k) + F + hermite_closure(theta, X(k));
        }
    };
}

Vector lorenz96_truth_moments(const Lorenz96Options& o) {
    check_l96(o);
    std::mt19937_64 rng(o.seed);
    Vector s(o.K + o.J * o.K);
    s.head(o.K) = gaussian_vector(rng, o.K, 1.0);
    s.tail(o.J * o.K) = gaussian_vector(rng, o.J * o.K, 0.01);
    return time_average(lorenz96_full_rhs(o), s, l96_spec(o));
}

namespace {

Vector l96_forward_initial(const Lorenz96Options& o) {
    std::mt19937_64 rng(o.seed);
    rng.discard(1000003);
    return gaussian_vector(rng, o.K, 1.0);
}

}  // namespace

Vector lorenz96_reduced_moments(const Lorenz96Options& o, const Vector& theta) {
    check_l96(o);
    return time_average(lorenz96_reduced_rhs(o, theta), l96_forward_initial(o), l96_spec(o));
}

InverseProblem lorenz96_multiscale(const Lorenz96Options& o) {
    check_l96(o);
    const Vector y_ref = lorenz96_truth_moments(o);
    const Vector y = add_noise(y_ref, o.noise_level, o.seed ^ 0x9e3779b97f4a7c15ULL);

    const TimeAverageSpec spec = l96_spec(o);
    const Vector x0 = l96_forward_initial(o);
    InverseProblem p;
    p.name = "lorenz96";
    p.n_theta = 12;
    p.n_y = y.size();
    p.forward = [o, spec, x0](const Vector& theta) -> Vector {
        return time_average(lorenz96_reduced_rhs(o, theta), x0, spec);
    };
    p.y_obs = y;
    p.sigma_eta = (0.05 * 0.05 * y.array().square()).matrix().asDiagonal();
    return p;
}

}  // namespace kalinv::problems
