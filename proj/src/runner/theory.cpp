#include "kalinv/errors.hpp"
#include "kalinv/linear_theory.hpp"
#include "kalinv/problems/analytic.hpp"
#include "kalinv/runner.hpp"

namespace kalinv::runner {

namespace {

constexpr double kGamma = 0.25;

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

theory::LinearProblemSpec spec_for(problems::Linear2Variant variant, double alpha) {
    const InverseProblem p = problems::linear2(variant);
    theory::LinearProblemSpec s;
    s.G = *p.linear_operator;
    s.y = p.y_obs;
    s.sigma_nu = 2.0 * p.sigma_eta;
    s.sigma_omega = (2.0 - alpha * alpha) * kGamma * Matrix::Identity(2, 2);
    s.alpha = alpha;
    s.r0 = Vector::Zero(2);
    return s;
}

/// Steady-state oracle against 500 exact Kalman steps from m0 = r0, C0 = gamma I.
json steady_state_checks(const theory::LinearProblemSpec& spec, bool& pass) {
    const theory::SteadyState ss = theory::solve_steady_covariance(spec, kGamma);
    const HyperParams hp = spec.hyperparams();
    GaussianState state{spec.r0, kGamma * Matrix::Identity(spec.n_theta(), spec.n_theta())};
    for (int n = 0; n < 500; ++n) state = kalman_step(state, spec.G, spec.y, hp);

    const double mean_err = (state.mean - ss.m_inf).norm();
    const double cov_err = (state.cov - ss.c_inf).norm();
    const double residual = theory::steady_state_residual(spec, ss.c_inf);
    const double grad = theory::phi_r_gradient_fd(spec, ss.c_hat_inf, ss.m_inf).norm();
    const bool ok = mean_err < 1e-8 && cov_err < 1e-8 && residual < 1e-8 && grad < 1e-6;
    pass = pass && ok;
    return {{"alpha", spec.alpha},
            {"m_inf", vec(ss.m_inf)},
            {"oracle_iterations", ss.iterations_to_converge},
            {"kf_mean_error_n500", mean_err},
            {"kf_cov_error_n500", cov_err},
            {"steady_state_residual", residual},
            {"phi_r_gradient_norm", grad},
            {"tolerances", {{"iterate", 1e-8}, {"residual", 1e-8}, {"gradient", 1e-6}}},
            {"pass", ok}};
}

}  // namespace

TheoryOutcome validate_theory(const std::string& selector) {
    TheoryOutcome out;
    out.pass = true;
    out.report["spec"] = selector;
    out.report["gamma"] = kGamma;

    if (selector == "ns" || selector == "od") {
        const auto variant = selector == "ns" ? problems::Linear2Variant::NS : problems::Linear2Variant::OD;
        out.report["steady_state"] = steady_state_checks(spec_for(variant, 0.5), out.pass);
    } else if (selector == "ud") {
        const theory::LinearProblemSpec spec = spec_for(problems::Linear2Variant::UD, 0.5);
        out.report["steady_state"] = steady_state_checks(spec, out.pass);
        const Vector m_inf = theory::solve_steady_covariance(spec, kGamma).m_inf;
        Vector expected(2);
        expected << 0.597, 1.195;
        const double dev = (m_inf - expected).cwiseAbs().maxCoeff();
        const bool ok = dev < 0.01;
        out.pass = out.pass && ok;
        out.report["limit"] = {{"m_inf", vec(m_inf)}, {"expected", vec(expected)}, {"max_abs_deviation", dev},
                               {"tolerance", 0.01}, {"pass", ok}};
    } else if (selector == "ud-alpha1") {
        const theory::LinearProblemSpec spec = spec_for(problems::Linear2Variant::UD, 1.0);
        const Matrix C0 = kGamma * Matrix::Identity(2, 2);
        const Vector m0 = Vector::Zero(2);

        const theory::AlgebraicLawReport law = theory::algebraic_law_check(spec.G, spec.sigma_nu, C0, m0, spec.y, 50);
        const bool law_ok = law.max_covariance_residual < 1e-10 && law.max_mean_residual < 1e-10;
        out.report["algebraic_law"] = {{"n_max", 50},
                                       {"max_covariance_residual", law.max_covariance_residual},
                                       {"max_mean_residual", law.max_mean_residual},
                                       {"collapse_error_n50", law.steps.back().collapse_error},
                                       {"tolerance", 1e-10},
                                       {"pass", law_ok}};

        const theory::DivergenceReport div = theory::divergence_bound_check(spec, C0, m0, 200);
        Vector expected(2);
        expected << 0.6, 1.2;
        const double dev = (div.final_mean - expected).cwiseAbs().maxCoeff();
        const bool div_ok = div.min_margin >= -1e-10 && div.covariance_grows && dev < 0.005;
        out.report["divergence_bound"] = {{"n_max", 200},
                                          {"min_margin", div.min_margin},
                                          {"covariance_grows", div.covariance_grows},
                                          {"cov_frobenius_n1", div.steps.front().cov_frobenius},
                                          {"cov_frobenius_n200", div.steps.back().cov_frobenius},
                                          {"final_mean", vec(div.final_mean)},
                                          {"mean_increment_log_rate", div.mean_increment_rate},
                                          {"max_abs_mean_deviation", dev},
                                          {"tolerances", {{"margin", -1e-10}, {"mean", 0.005}}},
                                          {"pass", div_ok}};
        out.pass = law_ok && div_ok;
    } else {
        throw ConfigError("--spec", "must be one of ns, od, ud, ud-alpha1");
    }
    out.report["pass"] = out.pass;
    return out;
}

}  // namespace kalinv::runner
