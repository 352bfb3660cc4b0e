#include "kalinv/errors.hpp"
#include "kalinv/problems/analytic.hpp"
#include "kalinv/problems/darcy.hpp"
#include "kalinv/problems/lorenz.hpp"
#include "kalinv/problems/transforms.hpp"
#include "kalinv/runner.hpp"
#include "kalinv/uks.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace kalinv::runner {

namespace fs = std::filesystem;

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kTruth = 0, kNoise = 1, kEnsemble = 2 };

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
    return rows;
}

std::string format_number(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
    if (!f) throw InvalidArgument("write to " + path.string() + " failed");
}

class HistoryWriter {
public:
    explicit HistoryWriter(const fs::path& path) : out_(path) {
        if (!out_) throw InvalidArgument("cannot open " + path.string() + " for writing");
        out_ << "iteration,misfit,param_error,field_error,cov_frobenius\n";
        out_.flush();
    }

    void row(long iteration, double misfit, const std::optional<double>& param_error,
             const std::optional<double>& field_error, double cov_frobenius) {
        out_ << iteration << ',' << format_number(misfit) << ',' << optional_cell(param_error) << ','
             << optional_cell(field_error) << ',' << format_number(cov_frobenius) << '\n';
        out_.flush();
    }

    void row(const ConvergenceRecord& r) {
        row(r.iteration, r.misfit, r.param_error, r.relative_field_error, r.cov_frobenius);
    }

private:
    std::ofstream out_;
};

std::string problem_name(const std::string& s) { return s.substr(0, s.find(':')); }
std::string problem_variant(const std::string& s) {
    const auto c = s.find(':');
    return c == std::string::npos ? "" : s.substr(c + 1);
}

}  // namespace

int exit_code_for(ErrorKind kind) {
    if (kind == ErrorKind::ConfigError || kind == ErrorKind::InvalidArgument) return 2;
    return 10 + static_cast<int>(kind);
}

ProblemSetup build_problem(const RunConfig& c) {
    const std::string name = problem_name(c.problem);
    const std::string variant = problem_variant(c.problem);
    const json& p = c.problem_params;
    const std::uint64_t truth_seed = derive_seed(c.seed, kTruth);
    bool noise_applied = false;

    ProblemSetup s;
    if (name == "linear2") {
        s.problem = problems::linear2(*problems::parse_linear2_variant(variant));
        s.r0 = Vector::Zero(2);
    } else if (name == "hilbert") {
        s.problem = problems::hilbert(p.value("n_theta", 10));
        s.r0 = Vector::Zero(s.problem.n_theta);
    } else if (name == "darcy") {
        problems::DarcyOptions o;
        o.grid_n = p.value("grid_n", o.grid_n);
        o.n_modes_truth = p.value("n_modes_truth", o.n_modes_truth);
        o.n_theta = p.value("n_theta", o.n_theta);
        o.seed = truth_seed;
        s.problem = problems::darcy2d(o);
        s.r0 = Vector::Zero(o.n_theta);
    } else if (name == "lorenz63") {
        problems::Lorenz63Options o;
        o.variant = *problems::parse_lorenz63_variant(variant);
        o.dt = p.value("dt", o.dt);
        o.spin_up = p.value("spin_up", o.spin_up);
        o.window = p.value("window", o.window);
        o.truth_windows = p.value("truth_windows", o.truth_windows);
        o.seed = truth_seed;
        s.problem = problems::lorenz63(o);
        s.r0 = Vector::Constant(s.problem.n_theta, 5.0);
    } else if (name == "lorenz96") {
        problems::Lorenz96Options o;
        o.window = p.value("window", o.window);
        o.spin_up = p.value("spin_up", o.spin_up);
        o.dt = p.value("dt", o.dt);
        if (p.contains("moments")) {
            for (const json& e : p.at("moments")) o.moments.push_back({e[0].get<int>(), e[1].get<int>()});
        }
        o.seed = truth_seed;
        o.noise_level = c.noise_level;
        s.problem = problems::lorenz96_multiscale(o);
        s.r0 = Vector::Zero(12);
        noise_applied = true;
    } else if (name == "logistic") {
        s.problem = problems::logistic();
        s.r0 = Vector::Ones(2);
    } else {
        throw ConfigError("problem", "unknown problem '" + name + "'");
    }

    if (!noise_applied) s.problem.y_obs = problems::add_noise(s.problem.y_obs, c.noise_level, derive_seed(c.seed, kNoise));

    if (p.contains("constraint")) {
        const json& cj = p.at("constraint");
        problems::Constraint con = problems::Constraint::nonnegative();
        if (cj.is_object()) {
            const auto lo = cj.at("lower").get<std::vector<double>>();
            const auto hi = cj.at("upper").get<std::vector<double>>();
            con = problems::Constraint::box(Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                                            Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size())));
        }
        s.problem = problems::constrain(s.problem, con);
    }
    if (c.fd_jacobian && !s.problem.has_jacobian()) s.problem = with_fd_jacobian(s.problem);
    check_problem(s.problem);
    return s;
}

ExecuteResult execute(const RunConfig& c) {
    ExecuteResult result;
    const auto started = std::chrono::steady_clock::now();
    const fs::path dir(c.output_dir);

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        result.exit_code = exit_code_for(ErrorKind::ConfigError);
        result.diagnostic = "output_dir: cannot use '" + c.output_dir + "' as an output directory";
        return result;
    }

    json manifest;
    manifest["toolkit"] = "kalinv";
    manifest["version"] = kVersion;
    manifest["config"] = c.to_json();
    manifest["seeds"] = {{"run", c.seed},
                         {"truth", derive_seed(c.seed, kTruth)},
                         {"noise", derive_seed(c.seed, kNoise)},
                         {"ensemble", derive_seed(c.seed, kEnsemble)}};
    manifest["status"] = "running";
    manifest["files"] = json::array({"manifest.json"});
    result.files.push_back("manifest.json");

    auto record_file = [&](const std::string& f) {
        result.files.push_back(f);
        manifest["files"].push_back(f);
    };
    auto finalize = [&](const std::string& status) {
        manifest["status"] = status;
        manifest["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_json(dir / "manifest.json", manifest);
    };

    try {
        write_json(dir / "manifest.json", manifest);
    } catch (const Error& e) {
        result.exit_code = exit_code_for(ErrorKind::ConfigError);
        result.diagnostic = std::string("output_dir: ") + e.what();
        return result;
    }

    try {
        const ProblemSetup setup = build_problem(c);
        const InverseProblem& problem = setup.problem;
        problems::write_vector_csv(dir / "observations.csv", "y_obs", problem.y_obs);
        record_file("observations.csv");

        const Eigen::Index n = problem.n_theta;
        const GaussianState init{setup.r0, c.gamma * Matrix::Identity(n, n)};
        json final_state;
        final_state["method"] = c.method;
        bool completed = false;
        std::optional<ErrorKind> error_kind;
        std::string error_message;

        HistoryWriter history(dir / "history.csv");
        record_file("history.csv");

        if (c.method == "uks") {
            const BayesianSpec spec = bayesian_from(problem, setup.r0, init.cov);
            manifest["derived"] = {{"prior_mean", to_json(setup.r0)},
                                   {"prior_cov", to_json(init.cov)},
                                   {"h", c.uks.h},
                                   {"steps", static_cast<long>(std::ceil(c.uks.t_end / c.uks.h - 1e-9))}};
            write_json(dir / "manifest.json", manifest);

            std::optional<GaussianState> reference;
            if (problem.linear_operator) {
                reference = linear_gaussian_posterior(*problem.linear_operator, problem.sigma_eta, problem.y_obs,
                                                      setup.r0, init.cov);
            }
            auto emit = [&](long step, const Vector& mean, double cov_norm) {
                std::optional<double> pe;
                if (problem.theta_ref) pe = (problem.physical(mean) - problem.physical(*problem.theta_ref)).norm();
                std::optional<double> fe;
                if (problem.field_error) fe = problem.field_error(mean);
                history.row(step, problem.misfit(mean), pe, fe, cov_norm);
            };
            emit(0, init.mean, init.cov.norm());
            const UksResult r = run_uks(spec, init, c.uks.h, c.uks.t_end, reference, c.uks.record_every, c.spread_a);
            for (const UksRecord& rec : r.history) emit(rec.step, rec.mean, rec.cov_frobenius);
            completed = r.completed;
            error_kind = r.error_kind;
            error_message = r.error_message;
            final_state["steps_completed"] = r.steps_taken;
            final_state["time"] = static_cast<double>(r.steps_taken) * c.uks.h;
            final_state["mean"] = to_json(r.final_state.mean);
            final_state["covariance"] = to_json(r.final_state.cov);
            if (reference) {
                final_state["posterior_mean_error"] = (r.final_state.mean - reference->mean).norm();
                final_state["posterior_cov_error"] = (r.final_state.cov - reference->cov).norm();
            }
        } else {
            const Method method = *parse_method(c.method);
            const HyperParams hp = HyperParams::standard(c.alpha, setup.r0, c.gamma, problem.sigma_eta, c.spread_a);
            manifest["derived"] = {{"sigma_omega", to_json(hp.sigma_omega)},
                                   {"sigma_nu", to_json(hp.sigma_nu)},
                                   {"r0", to_json(hp.r0)},
                                   {"spread_a", hp.spread_a}};
            write_json(dir / "manifest.json", manifest);

            RunInit run_init = init;
            if (method == Method::Eki) {
                run_init = draw_ensemble(init, static_cast<std::size_t>(c.ensemble_size),
                                         derive_seed(c.seed, kEnsemble));
            }
            auto observer = [&](const ConvergenceRecord& rec) { history.row(rec); };
            const RunResult r = run(method, problem, hp, run_init, c.n_iters, observer);
            completed = r.completed;
            error_kind = r.error_kind;
            error_message = r.error_message;
            final_state["iterations_completed"] = static_cast<int>(r.history.size());
            final_state["mean"] = to_json(r.final_state.mean);
            final_state["covariance"] = to_json(r.final_state.cov);
            final_state["physical_mean"] = to_json(problem.physical(r.final_state.mean));
            if (r.final_ensemble) {
                json particles = json::array();
                for (const Vector& p : r.final_ensemble->particles) particles.push_back(to_json(p));
                final_state["ensemble"] = particles;
            }
        }

        final_state["completed"] = completed;
        if (error_kind) final_state["error"] = {{"kind", to_string(*error_kind)}, {"message", error_message}};
        write_json(dir / "final_state.json", final_state);
        record_file("final_state.json");

        if (!completed) {
            manifest["error"] = {{"kind", to_string(*error_kind)}, {"message", error_message}};
            finalize("aborted");
            result.exit_code = exit_code_for(*error_kind);
            result.diagnostic = error_message;
            return result;
        }
        finalize("completed");
    } catch (const Error& e) {
        manifest["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        finalize("failed");
        result.exit_code = exit_code_for(e.kind());
        result.diagnostic = e.what();
    }
    return result;
}

}  // namespace kalinv::runner
