#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& f) {
  std::ifstream is(f, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / "stochwave_test_cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

// Runs the CLI with stdout and stderr merged.
Run cli(const std::string& args) {
  const fs::path log = scratch() / "last.log";
  const std::string cmd = std::string(STOCHWAVE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path f = scratch() / name;
  std::ofstream(f) << text;
  return f;
}

const char* kSmall = R"({
  "modes": 4,
  "exponents": {"p": 4, "q": 2},
  "dt": 0.01,
  "horizon": 0.05,
  "initial": {"u0": {"kind": "modes", "coeffs": [0.5]}},
  "ensemble": {"paths": 1, "master_seed": 5}
})";

const char* kNoisy = R"({
  "modes": 4,
  "exponents": {"p": 4, "q": 2},
  "dt": 0.01,
  "horizon": 0.5,
  "initial": {"u0": {"kind": "modes", "coeffs": [0.5]}},
  "noise": {"eps": 0.2, "kappa": 1.0, "sigma0": {"kind": "sine", "amplitude": 1.0}},
  "ensemble": {"paths": 4, "master_seed": 5, "record_stride": 5}
})";

}  // namespace

TEST_CASE("missing config file") {
  const Run r = cli("simulate /nonexistent/dir/run.json --out " + (scratch() / "x.csv").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("/nonexistent/dir/run.json") != std::string::npos);
}

TEST_CASE("invalid configs exit with code 2 and name the problem") {
  const fs::path bad = write_config("p2.json", R"({"exponents": {"p": 2, "q": 2}})");
  const Run r = cli("simulate " + bad.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("exponents") != std::string::npos);
  CHECK(r.out.find("p > 2") != std::string::npos);

  const fs::path typo = write_config("typo.json", R"({"nosie": {}})");
  const Run t = cli("ensemble " + typo.string() + " --out " + (scratch() / "typo_run").string());
  CHECK(t.code == 2);
  CHECK(t.out.find("nosie") != std::string::npos);

  const fs::path ok = write_config("small.json", kSmall);
  CHECK(cli("ensemble " + ok.string() + " --paths 0 --out " + (scratch() / "zero").string()).code == 2);
  CHECK(cli("simulate").code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("simulate writes the documented CSV") {
  const fs::path cfg = write_config("small.json", kSmall);
  const fs::path csv = scratch() / "small.csv";
  const Run r = cli("simulate " + cfg.string() + " --seed 17 --out " + csv.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("seed 17") != std::string::npos);
  CHECK(r.out.find("stop completed") != std::string::npos);

  std::istringstream lines(slurp(csv));
  std::string meta, header, row0, row5;
  std::getline(lines, meta);
  std::getline(lines, header);
  std::getline(lines, row0);
  for (int k = 0; k < 5; ++k) std::getline(lines, row5);
  CHECK(meta.rfind("# stochwave-trajectory v1 seed=17 stop=completed t_stop=0.050000000000000003 step_stop=5 sup_e=",
                   0) == 0);
  CHECK(header ==
        "step,t,v_l2_sq,grad_u_sq,u_lp_p,v_lq_q,u_dot_v,e_energy,calE,damping_int,source_work_int,stoch_int,"
        "ito_corr_int,noise_qv");
  // Initial row: ||grad u||^2 = pi^2 / 4, ||u||_4^4 = 3/2 * 0.5^4 = 0.09375.
  std::istringstream c0(row0);
  std::string cell;
  std::vector<double> v0;
  while (std::getline(c0, cell, ',')) v0.push_back(std::stod(cell));
  REQUIRE(v0.size() == 14);
  CHECK(v0[3] == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-15));
  CHECK(v0[4] == doctest::Approx(0.09375).epsilon(1e-14));
  // Final row frozen from the first run of this configuration.
  std::istringstream c5(row5);
  std::vector<double> v5;
  while (std::getline(c5, cell, ',')) v5.push_back(std::stod(cell));
  REQUIRE(v5.size() == 14);
  const std::vector<double> golden{5, 0.05, 0.053723653478158814, 2.409989454451182, 0.089456154018470888,
                                   0.053723653478158821, -0.11452625037556845, 2.5084411849385764,
                                   1.2094925154600527, 0.00065814087336986795, -0.00086383681773207518, 0, 0, 0};
  for (std::size_t k = 0; k < golden.size(); ++k) CHECK(v5[k] == doctest::Approx(golden[k]).epsilon(1e-12));
}

TEST_CASE("a one-path ensemble reproduces simulate for the derived seed") {
  const fs::path cfg = write_config("small.json", kSmall);
  const fs::path csv = scratch() / "derived.csv";
  const fs::path dir = scratch() / "one";
  REQUIRE(cli("simulate " + cfg.string() + " --out " + csv.string()).code == 0);
  REQUIRE(cli("ensemble " + cfg.string() + " --out " + dir.string()).code == 0);
  CHECK(slurp(csv) == slurp(dir / "paths" / "path_0.csv"));
  const json resolved = json::parse(slurp(dir / "config.json"));
  CHECK(resolved["ensemble"]["master_seed"] == 5);
  CHECK(resolved["resolved"]["steps"] == 5);
}

TEST_CASE("ensemble reruns and worker counts give identical directories") {
  const fs::path cfg = write_config("noisy.json", kNoisy);
  const fs::path a = scratch() / "rep_a";
  const fs::path b = scratch() / "rep_b";
  const fs::path c = scratch() / "rep_c";
  REQUIRE(cli("ensemble " + cfg.string() + " --workers 1 --out " + a.string()).code == 0);
  REQUIRE(cli("ensemble " + cfg.string() + " --workers 1 --out " + b.string()).code == 0);
  REQUIRE(cli("ensemble " + cfg.string() + " --workers 4 --out " + c.string()).code == 0);
  for (const fs::path& rel : {fs::path("config.json"), fs::path("aggregate.csv"), fs::path("paths/path_3.csv")}) {
    CHECK(slurp(a / rel) == slurp(b / rel));
    CHECK(slurp(a / rel) == slurp(c / rel));
  }
  CHECK_FALSE(slurp(a / "paths/path_0.csv") == slurp(a / "paths/path_1.csv"));
}

TEST_CASE("analyze") {
  // Positive initial energy without noise: certificate fails.
  const fs::path cfg = write_config("small.json", kSmall);
  const fs::path dir = scratch() / "pos";
  REQUIRE(cli("ensemble " + cfg.string() + " --out " + dir.string()).code == 0);
  const Run r = cli("analyze " + dir.string());
  REQUIRE(r.code == 0);
  const json a = json::parse(slurp(dir / "analysis.json"));
  CHECK(a["certificate"]["satisfied"] == false);
  CHECK(a["certificate"]["E1"] == 0.0);
  CHECK(a["T0"]["from_energy"].is_null());
  CHECK(a["T0"]["note"].get<std::string>().find("K") != std::string::npos);
  CHECK(a["alpha"] == doctest::Approx(0.125));

  // Blow-up data: certificate holds, L increases, K gives a lifespan bound.
  const fs::path bdir = scratch() / "blowup";
  REQUIRE(cli("ensemble " + std::string(STOCHWAVE_CONFIGS) + "/blowup.json --out " + bdir.string()).code == 0);
  REQUIRE(cli("analyze " + bdir.string() + " --K 1").code == 0);
  const json b = json::parse(slurp(bdir / "analysis.json"));
  CHECK(b["certificate"]["satisfied"] == true);
  CHECK(b["certificate"]["E0"] == doctest::Approx(-32.67).epsilon(1e-3));
  CHECK(b["L"]["positive_start"] == true);
  CHECK(b["L"]["nondecreasing"] == true);
  CHECK(b["blowup_probability"]["phat"] == 1.0);
  CHECK(b["T0"]["from_energy"] == doctest::Approx(7.0 / std::pow(32.67356, 1.0 / 7.0)).epsilon(1e-4));
  CHECK(fs::exists(bdir / "h_series.csv"));
  CHECK(fs::exists(bdir / "l_series.csv"));

  CHECK(cli("analyze " + (scratch() / "no_such_run").string()).code == 2);
  CHECK(cli("analyze " + bdir.string() + " --K -1").code == 2);
}

TEST_CASE("verify") {
  const Run y = cli("verify --suite yosida");
  CHECK(y.code == 0);
  const json report = json::parse(y.out);
  CHECK(report["passed"] == true);
  CHECK(report["suites"][0]["suite"] == "yosida");

  const Run u = cli("verify --suite nonsense");
  CHECK(u.code == 2);
  CHECK(u.out.find("basis, yosida, noise, energy, ode") != std::string::npos);
}
