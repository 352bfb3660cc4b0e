#include "kalinv/errors.hpp"
#include "kalinv/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using kalinv::runner::json;

json parse_param_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return text;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kalinv: iterated Kalman inversion toolkit"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Run one inversion and write its history and final state");
    std::string config_path;
    std::optional<std::string> problem, method, output_dir;
    std::optional<double> alpha, gamma, noise_level, spread_a, uks_h, uks_t_end;
    std::optional<long> iters, ensemble_size, record_every;
    std::optional<std::uint64_t> seed;
    bool fd_jacobian = false;
    std::vector<std::string> params;
    run_cmd->add_option("--config", config_path, "JSON configuration file");
    run_cmd->add_option("--problem", problem, "linear2:NS|OD|UD, hilbert, darcy, lorenz63:one_param|three_param, lorenz96, logistic");
    run_cmd->add_option("--method", method, "uki, eki, exki, kf or uks");
    run_cmd->add_option("--alpha", alpha, "regularization parameter in (0, 1]");
    run_cmd->add_option("--gamma", gamma, "prior scale: C0 = gamma I");
    run_cmd->add_option("--iters", iters, "number of iterations");
    run_cmd->add_option("--ensemble-size", ensemble_size, "EKI ensemble size");
    run_cmd->add_option("--noise-level", noise_level, "relative observation noise");
    run_cmd->add_option("--seed", seed, "random seed");
    run_cmd->add_option("--spread-a", spread_a, "sigma-point spread override");
    run_cmd->add_option("--output-dir", output_dir, "directory for output files");
    run_cmd->add_flag("--fd-jacobian", fd_jacobian, "use finite differences when the problem has no jacobian");
    run_cmd->add_option("--param", params, "problem parameter as key=value (value parsed as JSON when possible)");
    run_cmd->add_option("--uks-h", uks_h, "UKS time step");
    run_cmd->add_option("--uks-t-end", uks_t_end, "UKS final time");
    run_cmd->add_option("--record-every", record_every, "UKS history stride in steps");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Check the linear convergence theory on a built-in spec");
    std::string spec_name;
    std::string validate_dir = ".";
    validate_cmd->add_option("--spec", spec_name, "ns, od, ud or ud-alpha1")->required();
    validate_cmd->add_option("--output-dir", validate_dir, "directory for theory_report.json");

    // landscape
    auto* land_cmd = app.add_subcommand("landscape", "Tabulate the Gaussian-averaged map and its gradient");
    kalinv::runner::LandscapeOptions land;
    std::string land_out;
    land_cmd->add_option("--problem", land.problem, "lorenz63:one_param");
    land_cmd->add_option("--r-min", land.r_min);
    land_cmd->add_option("--r-max", land.r_max);
    land_cmd->add_option("--points", land.points);
    land_cmd->add_option("--sigma-r", land.sigma_r);
    land_cmd->add_option("--quad-order", land.quad_order);
    land_cmd->add_option("--fd-step", land.fd_step);
    land_cmd->add_option("--seed", land.seed);
    land_cmd->add_option("--out", land_out, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            json cfg = config_path.empty() ? json::object() : kalinv::runner::load_config_file(config_path);
            if (!cfg.is_object()) throw kalinv::ConfigError("--config", "top level must be an object");
            if (problem) cfg["problem"] = *problem;
            if (method) cfg["method"] = *method;
            if (alpha) cfg["alpha"] = *alpha;
            if (gamma) cfg["gamma"] = *gamma;
            if (iters) cfg["n_iters"] = *iters;
            if (ensemble_size) cfg["ensemble_size"] = *ensemble_size;
            if (noise_level) cfg["noise_level"] = *noise_level;
            if (seed) cfg["seed"] = *seed;
            if (spread_a) cfg["spread_a"] = *spread_a;
            if (output_dir) cfg["output_dir"] = *output_dir;
            if (fd_jacobian) cfg["fd_jacobian"] = true;
            if (uks_h) cfg["uks"]["h"] = *uks_h;
            if (uks_t_end) cfg["uks"]["t_end"] = *uks_t_end;
            if (record_every) cfg["uks"]["record_every"] = *record_every;
            for (const std::string& kv : params) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0) throw kalinv::ConfigError("--param", "expected key=value, got '" + kv + "'");
                cfg["problem_params"][kv.substr(0, eq)] = parse_param_value(kv.substr(eq + 1));
            }

            const kalinv::runner::RunConfig config = kalinv::runner::config_from_json(cfg);
            const kalinv::runner::ExecuteResult r = kalinv::runner::execute(config);
            if (r.exit_code != 0) {
                std::cerr << "kalinv: " << r.diagnostic << '\n';
                return r.exit_code;
            }
            std::cout << "wrote";
            for (const auto& f : r.files) std::cout << ' ' << f;
            std::cout << " to " << config.output_dir << '\n';
            return 0;
        }
        if (validate_cmd->parsed()) {
            const kalinv::runner::TheoryOutcome t = kalinv::runner::validate_theory(spec_name);
            std::error_code ec;
            std::filesystem::create_directories(validate_dir, ec);
            const auto path = std::filesystem::path(validate_dir) / "theory_report.json";
            std::ofstream f(path);
            if (!f) throw kalinv::ConfigError("--output-dir", "cannot write " + path.string());
            f << t.report.dump(2) << '\n';
            std::cout << spec_name << ": " << (t.pass ? "pass" : "FAIL") << " (" << path.string() << ")\n";
            return t.pass ? 0 : 1;
        }
        if (land_cmd->parsed()) {
            const auto rows = kalinv::runner::compute_landscape(land);
            kalinv::runner::write_landscape_csv(land_out, rows);
            std::cout << "wrote " << rows.size() << " rows to " << land_out << '\n';
            return 0;
        }
    } catch (const kalinv::Error& e) {
        std::cerr << "kalinv: " << e.what() << '\n';
        return kalinv::runner::exit_code_for(e.kind());
    }
    return 0;
}
