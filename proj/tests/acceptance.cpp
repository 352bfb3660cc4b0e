// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "kalinv/engines.hpp"
#include "kalinv/errors.hpp"
#include "kalinv/linear_theory.hpp"
#include "kalinv/problems/analytic.hpp"
#include "kalinv/problems/lorenz.hpp"
#include "kalinv/runner.hpp"
#include "kalinv/uks.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace kalinv;
using problems::Linear2Variant;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

constexpr Linear2Variant kAll[] = {Linear2Variant::NS, Linear2Variant::OD, Linear2Variant::UD};

GaussianState prior_state(Eigen::Index n, double gamma) {
    return {Vector::Zero(n), gamma * Matrix::Identity(n, n)};
}

theory::LinearProblemSpec linear_spec(Linear2Variant v, double alpha, double gamma) {
    const InverseProblem p = problems::linear2(v);
    theory::LinearProblemSpec s;
    s.G = *p.linear_operator;
    s.y = p.y_obs;
    s.sigma_nu = 2.0 * p.sigma_eta;
    s.sigma_omega = (2.0 - alpha * alpha) * gamma * Matrix::Identity(2, 2);
    s.alpha = alpha;
    s.r0 = Vector::Zero(2);
    return s;
}

double min_eig(const Matrix& m) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrize(m), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

std::vector<double> errors_of(const RunResult& r, const Vector& ref) {
    std::vector<double> e{(r.initial.mean - ref).norm()};
    for (const auto& rec : r.history) e.push_back((rec.mean - ref).norm());
    return e;
}

// 1: UKI coincides with the exact Kalman filter on linear problems.
void linear_exactness(Outcome& o) {
    double worst = 0.0;
    for (Linear2Variant v : kAll) {
        const InverseProblem p = problems::linear2(v);
        for (double alpha : {1.0, 0.5}) {
            const HyperParams hp = HyperParams::standard(alpha, Vector::Zero(2), 0.25, p.sigma_eta);
            GaussianState u = prior_state(2, 0.25);
            GaussianState k = u;
            for (int n = 1; n <= 50; ++n) {
                u = uki_step(u, p, hp);
                k = kalman_step(k, *p.linear_operator, p.y_obs, hp);
                worst = std::max(worst, (u.mean - k.mean).norm() + (u.cov - k.cov).norm());
            }
        }
    }
    o.detail << "max discrepancy " << worst;
    o.require(worst < 1e-8, "discrepancy < 1e-8");
}

// 2: NS/OD recovery with exponential error decay.
void ns_od_recovery(Outcome& o) {
    for (Linear2Variant v : {Linear2Variant::NS, Linear2Variant::OD}) {
        const InverseProblem p = problems::linear2(v);
        const HyperParams hp = HyperParams::standard(1.0, Vector::Zero(2), 0.25, p.sigma_eta);
        const RunResult r = run(Method::Uki, p, hp, prior_state(2, 0.25), 30);
        const std::vector<double> e = errors_of(r, *p.theta_ref);
        int hit = -1;
        for (std::size_t n = 0; n < e.size(); ++n) {
            if (e[n] < 1e-6) {
                hit = static_cast<int>(n);
                break;
            }
        }
        // Log-linear fit over the pre-roundoff part of the curve.
        std::vector<double> xs, ys;
        for (std::size_t n = 1; n < e.size() && e[n] > 1e-12; ++n) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(e[n]));
        }
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        const double slope = sxy / sxx;
        const double r2 = sxy * sxy / (sxx * syy);
        o.detail << problems::to_string(v) << ": e30=" << e.back() << " first n<1e-6 " << hit << " log-slope " << slope
                 << " r2 " << r2 << "; ";
        o.require(hit >= 0 && hit <= 30, std::string(problems::to_string(v)) + " error < 1e-6 within 30");
        o.require(slope < 0.0 && r2 > 0.95, std::string(problems::to_string(v)) + " log-linear decay");
    }
}

// 3: under-determined limits.
void ud_limits(Outcome& o) {
    const InverseProblem p = problems::linear2(Linear2Variant::UD);
    {
        const HyperParams hp = HyperParams::standard(0.5, Vector::Zero(2), 0.25, p.sigma_eta);
        const RunResult r = run(Method::Uki, p, hp, prior_state(2, 0.25), 200);
        Vector expect(2);
        expect << 0.597, 1.195;
        const double dev = (r.final_state.mean - expect).cwiseAbs().maxCoeff();
        o.detail << "alpha=0.5 mean [" << r.final_state.mean.transpose() << "] dev " << dev << "; ";
        o.require(dev < 0.01, "alpha=0.5 limit within 0.01");
    }
    {
        const HyperParams hp = HyperParams::standard(1.0, Vector::Zero(2), 0.25, p.sigma_eta);
        GaussianState s = prior_state(2, 0.25);
        const Matrix c0 = s.cov;
        double margin = std::numeric_limits<double>::infinity();
        double c1 = 0.0;
        for (int n = 1; n <= 200; ++n) {
            s = uki_step(s, p, hp);
            if (n == 1) c1 = s.cov.norm();
            margin = std::min(margin, min_eig(c0 + n * hp.sigma_omega - s.cov));
        }
        Vector expect(2);
        expect << 0.6, 1.2;
        const double dev = (s.mean - expect).cwiseAbs().maxCoeff();
        o.detail << "alpha=1 mean [" << s.mean.transpose() << "] dev " << dev << " |C1|=" << c1
                 << " |C200|=" << s.cov.norm() << " margin " << margin;
        o.require(dev < 0.005, "alpha=1 limit within 0.005");
        o.require(s.cov.norm() > 10.0 * c1, "covariance grows");
        o.require(margin >= -1e-10, "bound margin >= -1e-10");
    }
}

// 4: Kalman iterates against the steady-state oracle and the stationarity of Phi_R.
void steady_state_oracle(Outcome& o) {
    std::vector<theory::LinearProblemSpec> specs = {linear_spec(Linear2Variant::NS, 0.5, 0.25),
                                                    linear_spec(Linear2Variant::OD, 0.5, 0.25)};
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const int nt = 2 + static_cast<int>(seed % 3);
        const oracle::RandomSpec rs = oracle::random_full_rank(nt, nt + static_cast<int>(seed % 2), seed);
        const double alpha = 0.3 + 0.1 * seed;
        theory::LinearProblemSpec s;
        s.G = rs.G;
        s.y = rs.y;
        s.sigma_nu = 2.0 * rs.sigma_eta;
        s.sigma_omega = (2.0 - alpha * alpha) * 0.5 * Matrix::Identity(nt, nt);
        s.alpha = alpha;
        s.r0 = Vector::LinSpaced(nt, -1.0, 1.0);
        specs.push_back(s);
    }
    double worst_iter = 0.0, worst_grad = 0.0, worst_independent = 0.0;
    for (const auto& s : specs) {
        const theory::SteadyState ss = theory::solve_steady_covariance(s);
        GaussianState st{s.r0, Matrix::Identity(s.n_theta(), s.n_theta())};
        const HyperParams hp = s.hyperparams();
        for (int n = 0; n < 500; ++n) st = kalman_step(st, s.G, s.y, hp);
        worst_iter = std::max({worst_iter, (st.mean - ss.m_inf).norm(), (st.cov - ss.c_inf).norm()});
        worst_grad = std::max(worst_grad, theory::phi_r_gradient_fd(s, ss.c_hat_inf, ss.m_inf).norm());

        const Matrix c_ind = oracle::steady_cov(s.G, s.sigma_nu, s.sigma_omega, s.alpha);
        const Vector m_ind = oracle::phi_r_minimizer(s.G, s.y, s.sigma_nu, s.alpha * s.alpha * c_ind + s.sigma_omega,
                                                     s.alpha, s.r0);
        worst_independent = std::max({worst_independent, (c_ind - ss.c_inf).norm(), (m_ind - ss.m_inf).norm()});
    }
    o.detail << specs.size() << " specs: max |KF_500 - oracle| " << worst_iter << ", max |grad Phi_R| " << worst_grad
             << ", oracle vs explicit-inverse reference " << worst_independent;
    o.require(worst_iter < 1e-8, "iterates within 1e-8");
    o.require(worst_grad < 1e-6, "gradient < 1e-6");
    o.require(worst_independent < 1e-8, "oracle agrees with explicit-inverse reference");
}

// 5: exact identity of the alpha = 1, sigma_omega = 0 recursion.
void algebraic_law(Outcome& o) {
    const InverseProblem p = problems::linear2(Linear2Variant::UD);
    const Matrix sigma_nu = 2.0 * p.sigma_eta;
    double worst_c = 0.0, worst_m = 0.0;
    Matrix c0b(2, 2);
    c0b << 0.5, 0.1, 0.1, 0.3;
    Vector m0b(2);
    m0b << 0.2, -0.4;
    const std::pair<Matrix, Vector> inits[] = {{0.25 * Matrix::Identity(2, 2), Vector::Zero(2)}, {c0b, m0b}};
    for (const auto& [c0, m0] : inits) {
        const auto rep = theory::algebraic_law_check(*p.linear_operator, sigma_nu, c0, m0, p.y_obs, 50);
        worst_c = std::max(worst_c, rep.max_covariance_residual);
        worst_m = std::max(worst_m, rep.max_mean_residual);
    }
    o.detail << "max covariance residual " << worst_c << ", max mean residual " << worst_m;
    o.require(worst_c < 1e-10 && worst_m < 1e-10, "residuals < 1e-10");
}

// 6: closed-form steady state under the C_* prescription.
void remark_closed_form(Outcome& o) {
    const InverseProblem p = problems::linear2(Linear2Variant::OD);
    const Matrix G = *p.linear_operator;
    const Matrix c_star = (G.transpose() * p.sigma_eta.inverse() * G).inverse();
    double worst = 0.0;
    for (double alpha : {0.5, 0.9, 1.0}) {
        theory::LinearProblemSpec s;
        s.G = G;
        s.y = p.y_obs;
        s.sigma_nu = 2.0 * p.sigma_eta;
        s.sigma_omega = (2.0 - alpha * alpha) * c_star;
        s.alpha = alpha;
        s.r0 = Vector::Zero(2);
        const theory::SteadyState ss = theory::solve_steady_covariance(s);
        worst = std::max({worst, (ss.c_inf - c_star).norm(), (ss.c_hat_inf - 2.0 * c_star).norm()});
    }
    o.detail << "max |C_inf - C*|, |C_hat_inf - 2C*| over alpha in {0.5, 0.9, 1}: " << worst;
    o.require(worst < 1e-8, "closed form to 1e-8");
}

// 7: UKI converges on the Hilbert system while finite-ensemble EKI diverges.
void hilbert_contrast(Outcome& o) {
    const InverseProblem p = problems::hilbert(10);
    const HyperParams hp = HyperParams::standard(1.0, Vector::Zero(10), 0.25, p.sigma_eta);
    const GaussianState init = prior_state(10, 0.25);
    const std::vector<double> eu = errors_of(run(Method::Uki, p, hp, init, 50), *p.theta_ref);
    const std::vector<double> ee = errors_of(run(Method::Eki, p, hp, draw_ensemble(init, 21, 0), 50), *p.theta_ref);
    const auto min_it = std::min_element(ee.begin(), ee.end());
    const long argmin = std::distance(ee.begin(), min_it);
    const std::vector<double> long_run = errors_of(run(Method::Uki, p, hp, init, 300), *p.theta_ref);
    const auto below = std::find_if(long_run.begin(), long_run.end(), [](double e) { return e < 0.1; });
    o.detail << "UKI e5=" << eu[5] << " e50=" << eu[50] << " first n<0.1 "
             << (below == long_run.end() ? -1L : static_cast<long>(std::distance(long_run.begin(), below)))
             << "; EKI min " << *min_it << " at n=" << argmin
             << " e50=" << ee[50] << " ratio " << ee[50] / eu[50];
    o.require(eu[50] < eu[5] && eu[50] < 0.1, "UKI error decreases below 0.1");
    o.require(argmin < 50, "EKI minimum before n=50");
    o.require(ee[50] >= 10.0 * eu[50], "EKI final error >= 10x UKI");
}

// 8: large-ensemble EKI step against one UKI step. The standard error of the
// one-step ensemble mean is measured across independent replicate ensembles.
void mean_field(Outcome& o) {
    const InverseProblem p = problems::linear2(Linear2Variant::NS);
    const HyperParams hp = HyperParams::standard(1.0, Vector::Zero(2), 0.25, p.sigma_eta);
    const GaussianState init = prior_state(2, 0.25);
    const GaussianState u = uki_step(init, p, hp);
    auto one_step_mean = [&](std::uint64_t seed) {
        const Ensemble ens0 = draw_ensemble(init, 100000, seed);
        Rng rng(ens0.rng_seed);
        return eki_step(ens0, p, hp, rng).mean();
    };
    constexpr int replicates = 16;
    std::vector<Vector> reps;
    for (int k = 0; k < replicates; ++k) reps.push_back(one_step_mean(1000 + k));
    Vector avg = Vector::Zero(2);
    for (const Vector& r : reps) avg += r / replicates;
    Vector var = Vector::Zero(2);
    for (const Vector& r : reps) var += (r - avg).cwiseAbs2() / (replicates - 1);
    const Vector sd = var.cwiseSqrt();

    const Vector m = one_step_mean(7);
    const double z = (m - u.mean).cwiseQuotient(sd).cwiseAbs().maxCoeff();
    const double z_avg = (avg - u.mean).cwiseQuotient(sd / std::sqrt(double(replicates))).cwiseAbs().maxCoeff();
    o.detail << "EKI mean [" << m.transpose() << "] UKI mean [" << u.mean.transpose() << "] replicate sd ["
             << sd.transpose() << "] |z| " << z << "; replicate average |z| " << z_avg;
    o.require(z < 5.0, "within 5 standard errors");
    o.require(z_avg < 5.0, "replicate average within 5 standard errors");
}

// 9: Darcy desk-scale inversion.
void darcy(Outcome& o) {
    runner::RunConfig c = runner::config_from_json(
        {{"problem", "darcy"},
         {"problem_params", {{"grid_n", 32}, {"n_modes_truth", 64}, {"n_theta", 8}}},
         {"n_iters", 30},
         {"output_dir", "unused"}});
    const runner::ProblemSetup s = runner::build_problem(c);
    const HyperParams hp = HyperParams::standard(1.0, s.r0, c.gamma, s.problem.sigma_eta);
    const RunResult r = run(Method::Uki, s.problem, hp, prior_state(8, c.gamma), 30);
    const double e0 = *r.initial.relative_field_error;
    const double e30 = *r.history.back().relative_field_error;
    // Monotone up to a relative slack of 1e-6 for the converged plateau.
    double worst_rise = 0.0;
    for (std::size_t i = 3; i < r.history.size(); ++i) {
        const double prev = r.history[i - 1].misfit;
        worst_rise = std::max(worst_rise, (r.history[i].misfit - prev) / prev);
    }
    o.detail << "field error " << e0 << " -> " << e30 << "; misfit " << r.history[2].misfit << " -> "
             << r.history.back().misfit << ", largest relative rise after n=3: " << worst_rise;
    o.require(r.completed, "run completed");
    o.require(e30 <= 0.5 * e0, "error halves");
    o.require(worst_rise <= 1e-6, "misfit monotone after n=3");
}

// 10: Lorenz63 parameter recovery.
void lorenz63_recovery(Outcome& o) {
    for (const char* variant : {"lorenz63:one_param", "lorenz63:three_param"}) {
        const runner::RunConfig c = runner::config_from_json({{"problem", variant}, {"output_dir", "unused"}});
        const runner::ProblemSetup s = runner::build_problem(c);
        const Eigen::Index n = s.problem.n_theta;
        const HyperParams hp = HyperParams::standard(1.0, s.r0, 1.0, s.problem.sigma_eta);
        const RunResult r = run(Method::Uki, s.problem, hp, GaussianState{s.r0, Matrix::Identity(n, n)}, 20);
        const Vector phys = s.problem.physical(r.final_state.mean);
        o.detail << variant << " [" << phys.transpose() << "]; ";
        o.require(r.completed, std::string(variant) + " completed");
        if (n == 1) {
            o.require(std::abs(phys(0) - 28.0) < 0.5, "|r - 28| < 0.5");
        } else {
            Vector truth(3);
            truth << 10.0, 28.0, 8.0 / 3.0;
            const double rel = ((phys - truth).array() / truth.array()).abs().maxCoeff();
            o.detail << "max rel error " << rel;
            o.require(rel < 0.05, "within 5%");
        }
    }
}

// 11: Gaussian-averaged landscape.
void landscape(Outcome& o) {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(-3.0 + 0.3 * i);
    const double sigma = 0.469;
    const auto pts = averaged_landscape_1d([](double x) { return x * x; }, grid, sigma, 16);
    double worst = 0.0;
    for (const auto& p : pts) {
        worst = std::max({worst, std::abs(p.averaged_value - (p.r * p.r + sigma * sigma)),
                          std::abs(p.averaged_gradient - 2.0 * p.r)});
    }
    runner::LandscapeOptions lo;
    lo.r_min = 24.0;
    lo.r_max = 28.0;
    lo.points = 41;
    const auto rows = runner::compute_landscape(lo);
    double max_fdg = 0.0, max_raw = 0.0;
    for (const auto& r : rows) {
        max_fdg = std::max(max_fdg, std::abs(r.averaged_gradient));
        max_raw = std::max(max_raw, std::abs(r.fd_gradient));
    }
    o.detail << "x^2 max error " << worst << "; lorenz63 max|FdG| " << max_fdg << ", max|raw dG| " << max_raw;
    o.require(worst < 1e-8, "x^2 identities to 1e-8");
    o.require(max_fdg < 100.0, "|FdG| < 100");
    o.require(max_raw > 1e3, "raw derivative exceeds 1e3");
}

// 12: UKS on linear-Gaussian posteriors.
void uks_linear(Outcome& o) {
    double worst_m = 0.0, worst_c = 0.0;
    for (Linear2Variant v : kAll) {
        const InverseProblem p = problems::linear2(v);
        const Matrix prior = Matrix::Identity(2, 2);
        const BayesianSpec spec = bayesian_from(p, Vector::Zero(2), prior);
        const oracle::Gauss post = oracle::posterior(*p.linear_operator, p.sigma_eta, p.y_obs, Vector::Zero(2), prior);
        const UksResult r = run_uks(spec, GaussianState{Vector::Zero(2), prior}, 5e-5, 10.0);
        o.require(r.completed, std::string(problems::to_string(v)) + " completed");
        worst_m = std::max(worst_m, (r.final_state.mean - post.mean).norm());
        worst_c = std::max(worst_c, (r.final_state.cov - post.cov).norm());
    }
    bool raised = false;
    try {
        const InverseProblem p = problems::linear2(Linear2Variant::NS);
        uks_step(GaussianState{Vector::Zero(2), Matrix::Identity(2, 2)},
                 bayesian_from(p, Vector::Zero(2), Matrix::Identity(2, 2)), 0.6);
    } catch (const UnstableStep&) {
        raised = true;
    }
    o.detail << "max mean error " << worst_m << ", max cov error " << worst_c << ", h=0.6 raises "
             << (raised ? "UnstableStep" : "nothing");
    o.require(worst_m < 1e-3 && worst_c < 1e-3, "errors < 1e-3");
    o.require(raised, "h=0.6 raises UnstableStep");
}

// 13: UKS on the logistic posterior against random-walk Metropolis.
void uks_logistic(Outcome& o) {
    const InverseProblem p = problems::logistic();
    const Vector r0 = Vector::Ones(2);
    const Matrix prior = Matrix::Identity(2, 2);
    const BayesianSpec spec = bayesian_from(p, r0, prior);
    const UksResult u = run_uks(spec, GaussianState{r0, prior}, 5e-5, 10.0);
    const MetropolisResult mc = rw_metropolis(spec, 5'000'000, 1.0, 1'000'000, 2024);
    Vector expected_mc(2);
    expected_mc << 1.62, 1.31;
    const double mean_dev = (u.final_state.mean - mc.mean).cwiseAbs().maxCoeff();
    const double cov_dev = (u.final_state.cov - mc.cov).cwiseAbs().maxCoeff();
    const double oracle_dev = (mc.mean - expected_mc).cwiseAbs().maxCoeff();
    o.detail << "UKS mean [" << u.final_state.mean.transpose() << "] MCMC mean [" << mc.mean.transpose()
             << "] (acc " << mc.acceptance_rate << "); mean dev " << mean_dev << ", cov dev " << cov_dev
             << ", oracle vs [1.62 1.31] " << oracle_dev;
    o.require(u.completed, "UKS completed");
    o.require(mean_dev < 0.25, "mean within 0.25");
    o.require(cov_dev < 0.15, "covariance within 0.15");
    o.require(oracle_dev < 0.05, "oracle within 0.05 of reference");
}

// 14: Lorenz96 closure learning at desk scale.
void lorenz96(Outcome& o) {
    const runner::RunConfig c = runner::config_from_json(
        {{"problem", "lorenz96"}, {"problem_params", {{"window", 200.0}}}, {"output_dir", "unused"}});
    const runner::ProblemSetup s = runner::build_problem(c);
    const HyperParams hp = HyperParams::standard(1.0, s.r0, 1.0, s.problem.sigma_eta);
    const RunResult r = run(Method::Uki, s.problem, hp, prior_state(12, 1.0), 20);
    const Vector learned = s.problem.forward(r.final_state.mean);
    const Vector initial = s.problem.forward(Vector::Zero(12));
    const Vector truth = s.problem.y_obs;
    const double rel = ((learned.head(4) - truth.head(4)).array() / truth.head(4).array()).abs().maxCoeff();
    const double rel0 = ((initial.head(4) - truth.head(4)).array() / truth.head(4).array()).abs().maxCoeff();
    o.detail << "truth first moments [" << truth.head(4).transpose() << "] learned [" << learned.head(4).transpose()
             << "] max rel error " << rel << " (zero closure " << rel0 << ")";
    o.require(r.completed, "run completed");
    o.require(rel < 0.10, "first moments within 10%");
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<void(Outcome&)> check;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "UKI equals exact KF on linear systems", 1.0, linear_exactness},
        {2, "NS/OD recovery with exponential decay", 1.0, ns_od_recovery},
        {3, "UD limits and covariance bound", 1.0, ud_limits},
        {4, "Steady-state oracle agreement", 5.0, steady_state_oracle},
        {5, "Algebraic law for alpha = 1", 1.0, algebraic_law},
        {6, "Closed-form steady covariance", 1.0, remark_closed_form},
        {7, "Hilbert UKI vs EKI", 10.0, hilbert_contrast},
        {8, "EKI mean-field consistency", 10.0, mean_field},
        {9, "Darcy desk scale", 300.0, darcy},
        {10, "Lorenz63 recovery", 120.0, lorenz63_recovery},
        {11, "Averaged landscape", 300.0, landscape},
        {12, "UKS linear-Gaussian", 30.0, uks_linear},
        {13, "UKS logistic vs Metropolis", 180.0, uks_logistic},
        {14, "Lorenz96 desk scale", 600.0, lorenz96},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.check(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) {
            o.pass = false;
            o.detail << "[over runtime budget " << c.budget_seconds << " s]";
        }
        std::printf("criterion %2d %s: %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                    o.detail.str().c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
