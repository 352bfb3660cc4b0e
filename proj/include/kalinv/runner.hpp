#pragma once

#include "kalinv/engines.hpp"
#include "kalinv/problem.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kalinv::runner {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

struct UksSettings {
    double h = 5e-5;
    double t_end = 10.0;
    long record_every = 1000;
};

/// Fully resolved batch configuration.
struct RunConfig {
    std::string problem = "linear2:NS";  // name[:variant]
    json problem_params = json::object();
    std::string method = "uki";           // uki | eki | exki | kf | uks
    double alpha = 1.0;
    double gamma = 1.0;
    int n_iters = 20;
    int ensemble_size = 0;  // eki only
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> spread_a;
    std::string output_dir;
    bool fd_jacobian = false;
    UksSettings uks;

    json to_json() const;
};

/// Parses and validates a configuration object. Missing fields take their
/// defaults: gamma = 0.25 for linear2 and hilbert and 1 otherwise; the EKI
/// ensemble size is 100 for darcy, 2 N_theta + 1 elsewhere. Throws ConfigError
/// naming the offending field.
RunConfig config_from_json(const json& j);

/// Reads a JSON config file; throws ConfigError on I/O or syntax errors.
json load_config_file(const std::filesystem::path& path);

/// Problem instance plus the prior used to initialize it.
struct ProblemSetup {
    InverseProblem problem;
    Vector r0;
};

/// Builds the named problem with noise applied to y_obs.
ProblemSetup build_problem(const RunConfig& config);

/// Parameter dimension of the named problem without building it.
Eigen::Index problem_dimension(const std::string& problem, const json& params);

struct ExecuteResult {
    int exit_code = 0;
    std::string diagnostic;  // one line, empty on success
    std::vector<std::string> files;
};

/// Runs the configured experiment and writes history.csv, final_state.json,
/// observations.csv and manifest.json into output_dir. The output directory is
/// checked before anything is computed; nothing is written when it is unusable.
ExecuteResult execute(const RunConfig& config);

/// Exit status for an error kind: 2 for configuration problems, 10 + kind otherwise.
int exit_code_for(ErrorKind kind);

struct TheoryOutcome {
    bool pass = false;
    json report;
};

/// Runs the linear-theory checks for one of ns | od | ud | ud-alpha1.
TheoryOutcome validate_theory(const std::string& selector);

struct LandscapeOptions {
    std::string problem = "lorenz63:one_param";
    double r_min = 20.0;
    double r_max = 30.0;
    int points = 41;
    double sigma_r = 0.469;
    int quad_order = 16;
    double fd_step = 1e-4;
    std::uint64_t seed = 0;
};

struct LandscapeRow {
    double r = 0.0;
    double value = 0.0;
    double averaged_value = 0.0;
    double averaged_gradient = 0.0;
    double fd_gradient = 0.0;  // central difference of the raw map with step fd_step
};

std::vector<LandscapeRow> compute_landscape(const LandscapeOptions& options);
void write_landscape_csv(const std::filesystem::path& path, const std::vector<LandscapeRow>& rows);

}  // namespace kalinv::runner
