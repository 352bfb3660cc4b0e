#include "kalinv/errors.hpp"
#include "kalinv/runner.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

using namespace kalinv;
using namespace kalinv::runner;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kalinv_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

int cli(const std::string& args) {
    const int status = std::system((std::string(KALINV_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error_field(const json& j) {
    try {
        config_from_json(j);
    } catch (const ConfigError& e) {
        return e.field() + "|" + e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("configuration defaults") {
    const RunConfig c = config_from_json({{"output_dir", "out"}});
    CHECK(c.problem == "linear2:NS");
    CHECK(c.method == "uki");
    CHECK(c.alpha == 1.0);
    CHECK(c.gamma == 0.25);
    CHECK(c.n_iters == 20);
    CHECK(c.ensemble_size == 5);
    CHECK(c.seed == 0u);
    CHECK_FALSE(c.spread_a.has_value());

    const RunConfig d = config_from_json({{"output_dir", "o"}, {"problem", "darcy"}, {"method", "eki"}});
    CHECK(d.ensemble_size == 100);
    CHECK(d.gamma == 1.0);
    const RunConfig l = config_from_json({{"output_dir", "o"}, {"problem", "lorenz63:three_param"}});
    CHECK(l.ensemble_size == 7);
    CHECK(config_from_json(l.to_json()).problem == "lorenz63:three_param");
}

TEST_CASE("configuration errors name the offending field") {
    const std::string alpha = config_error_field({{"output_dir", "o"}, {"alpha", 1.5}});
    CHECK(alpha.rfind("alpha|", 0) == 0);
    CHECK(alpha.find("alpha must lie in (0,1]") != std::string::npos);
    CHECK(config_error_field({{"output_dir", "o"}, {"bogus", 1}}).find("bogus") != std::string::npos);
    CHECK(config_error_field({{"output_dir", "o"}, {"method", "kf"}, {"problem", "logistic"}}).rfind("method|", 0) == 0);
    CHECK(config_error_field({{"output_dir", "o"}, {"problem", "linear2:XX"}}).rfind("problem|", 0) == 0);
    CHECK(config_error_field({{"problem", "logistic"}}).rfind("output_dir|", 0) == 0);
    CHECK(config_error_field({{"output_dir", "o"}, {"n_iters", 0}}).rfind("n_iters|", 0) == 0);
}

TEST_CASE("cli exit codes") {
    const fs::path out = scratch("exit");
    CHECK(cli("run --problem linear2:NS --alpha 1.5 --output-dir " + out.string()) == 2);
    CHECK_FALSE(fs::exists(out));
    CHECK(cli("run --problem linear2:NS --iters 3 --output-dir " + out.string()) == 0);
    CHECK(cli("run --problem lorenz63:one_param --method exki --iters 2 --output-dir " + out.string()) ==
          exit_code_for(ErrorKind::JacobianUnavailable));
    CHECK(cli("run --problem lorenz63:one_param --method exki --fd-jacobian --iters 2 --output-dir " +
              out.string()) == 0);
    CHECK(cli("validate --spec nope --output-dir " + out.string()) == 2);
    fs::remove_all(out);
}

TEST_CASE("unusable output directory writes nothing") {
    const fs::path base = scratch("blocked");
    fs::create_directories(base);
    std::ofstream(base / "file") << "x";
    RunConfig c = config_from_json({{"output_dir", (base / "file" / "sub").string()}});
    const ExecuteResult r = execute(c);
    CHECK(r.exit_code == 2);
    CHECK(r.files.empty());
    CHECK(r.diagnostic.find("output_dir") != std::string::npos);
    size_t entries = 0;
    for (auto it = fs::directory_iterator(base); it != fs::directory_iterator(); ++it) ++entries;
    CHECK(entries == 1u);
    fs::remove_all(base);
}

TEST_CASE("run outputs and manifest") {
    const fs::path out = scratch("outputs");
    const ExecuteResult r = execute(config_from_json({{"output_dir", out.string()}, {"n_iters", 4}}));
    REQUIRE(r.exit_code == 0);
    const json m = read_json(out / "manifest.json");
    CHECK(m["status"] == "completed");
    std::set<std::string> listed(m["files"].begin(), m["files"].end());
    std::set<std::string> present;
    for (const auto& e : fs::directory_iterator(out)) present.insert(e.path().filename().string());
    CHECK(listed == present);
    CHECK(present.count("history.csv") == 1u);
    CHECK(m["derived"]["sigma_nu"][0][0] == doctest::Approx(0.02));

    std::ifstream h(out / "history.csv");
    std::string line;
    std::getline(h, line);
    CHECK(line == "iteration,misfit,param_error,field_error,cov_frobenius");
    int rows = 0;
    while (std::getline(h, line)) ++rows;
    CHECK(rows == 5);
    const json f = read_json(out / "final_state.json");
    CHECK(f["completed"] == true);
    CHECK(f["mean"].size() == 2u);
    fs::remove_all(out);
}

TEST_CASE("aborted runs keep their partial history") {
    const fs::path out = scratch("aborted");
    const ExecuteResult r = execute(config_from_json(
        {{"output_dir", out.string()}, {"method", "uks"}, {"uks", {{"h", 0.6}, {"t_end", 3.0}}}}));
    CHECK(r.exit_code == exit_code_for(ErrorKind::UnstableStep));
    const json m = read_json(out / "manifest.json");
    CHECK(m["status"] == "aborted");
    CHECK(m["error"]["kind"] == "UnstableStep");
    const std::string h = slurp(out / "history.csv");
    CHECK(h.find("\n0,") != std::string::npos);
    CHECK(read_json(out / "final_state.json")["completed"] == false);
    fs::remove_all(out);
}

TEST_CASE("history is byte-identical across runs and worker counts") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const json base = {{"problem", "logistic"}, {"method", "eki"}, {"ensemble_size", 40}, {"n_iters", 6}, {"seed", 3}};
    json ja = base, jb = base;
    ja["output_dir"] = a.string();
    jb["output_dir"] = b.string();
    setenv("KALINV_THREADS", "1", 1);
    REQUIRE(execute(config_from_json(ja)).exit_code == 0);
    setenv("KALINV_THREADS", "5", 1);
    REQUIRE(execute(config_from_json(jb)).exit_code == 0);
    unsetenv("KALINV_THREADS");
    CHECK(slurp(a / "history.csv") == slurp(b / "history.csv"));
    CHECK(read_json(a / "final_state.json") == read_json(b / "final_state.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("theory validation reports") {
    for (const char* spec : {"ns", "od", "ud", "ud-alpha1"}) {
        const TheoryOutcome t = validate_theory(spec);
        CHECK_MESSAGE(t.pass, spec);
        CHECK(t.report["pass"] == true);
    }
    CHECK(validate_theory("ud").report["limit"]["m_inf"][0] == doctest::Approx(0.597).epsilon(0.02));
    CHECK_THROWS_AS(validate_theory("xx"), ConfigError);

    const fs::path out = scratch("validate");
    CHECK(cli("validate --spec ud-alpha1 --output-dir " + out.string()) == 0);
    CHECK(read_json(out / "theory_report.json")["pass"] == true);
    fs::remove_all(out);
}

TEST_CASE("landscape rejects unsupported problems") {
    LandscapeOptions o;
    o.problem = "logistic";
    CHECK_THROWS_AS(compute_landscape(o), ConfigError);
    o = LandscapeOptions{};
    o.points = 1;
    CHECK_THROWS_AS(compute_landscape(o), ConfigError);
}
