// End-to-end checks of the skyrmion-lab binary: exit codes, file formats,
// determinism across runs and thread counts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "skylab/energy.hpp"

namespace {

const std::string kCli = SKYLAB_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string out_path = "cli_stdout.tmp";
  const std::string cmd = env + " " + kCli + " " + args + " > " + out_path + " 2> cli_stderr.tmp";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_path);
  std::stringstream body;
  body << in.rdbuf();
  return {WEXITSTATUS(status), body.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream body;
  body << in.rdbuf();
  return body.str();
}

}  // namespace

TEST_CASE("energy command emits the breakdown JSON") {
  const auto res = run("energy --family skyrmion:r=0.5 --r 0.5 --N 257 --S 20 --out cli_energy.json");
  REQUIRE(res.exit_code == 0);
  const auto b = skylab::breakdown_from_json(slurp("cli_energy.json"));
  CHECK(b.E_r == doctest::Approx(2.0 * M_PI).epsilon(0.01));
  CHECK(b.Q_int == -1);
  CHECK(b.N == 257);
  CHECK(b.S == 20.0);
  std::remove("cli_energy.json");
}

TEST_CASE("energy of the homogeneous family is the zero breakdown") {
  const auto res = run("energy --family homogeneous --r 1.0 --N 65 --out -");
  REQUIRE(res.exit_code == 0);
  const auto b = skylab::breakdown_from_json(res.out);
  CHECK(b.D == 0.0);
  CHECK(b.E_r == 0.0);
  CHECK(b.Q_int == 0);
}

TEST_CASE("energy of the k=2 endpoint minimizer") {
  const auto res = run("energy --family meromorphic:k=2,a=0+0.1i --r 1.0 --out -");
  REQUIRE(res.exit_code == 0);
  const auto b = skylab::breakdown_from_json(res.out);
  CHECK(b.Q_int == 2);
  CHECK(b.E_r == doctest::Approx(8.0 * M_PI).epsilon(0.02));
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("energy --family nonsense:v=1 --r 1").exit_code == 2);
  CHECK(run("energy --r 1").exit_code == 2);                      // missing family
  CHECK(run("energy --family skyrmion:r=1 --format yaml").exit_code == 2);
  CHECK(run("sweep").exit_code == 2);                             // empty r list
  CHECK(run("moduli --k 1 --a 0+0.1i").exit_code == 2);           // directed to distorted
  CHECK(run("bogus").exit_code == 2);
}

TEST_CASE("sweep CSV has the pinned header and sane divergence rows") {
  const auto res = run("sweep --r 1.25 --k -1 --L-list 10,20 --out cli_div.csv");
  REQUIRE(res.exit_code == 0);
  const std::string csv = slurp("cli_div.csv");
  CHECK(csv.rfind("r,k,scale,E,theorem_value,gap\n", 0) == 0);
  // two data rows, strictly decreasing energy
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  double e_prev = 1e99;
  int rows = 0;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    double r, scale, E;
    int k;
    std::sscanf(line.c_str(), "%lf,%d,%lf,%lf", &r, &k, &scale, &E);
    CHECK(E < e_prev);
    e_prev = E;
    ++rows;
  }
  CHECK(rows == 2);
  std::remove("cli_div.csv");
}

TEST_CASE("minimal-energy sweep over a tiny schedule") {
  const auto res = run("sweep --r-list 0.5 --k-list -1,0,1 --R-list 8,16 --out cli_min.csv");
  REQUIRE(res.exit_code == 0);
  const std::string csv = slurp("cli_min.csv");
  CHECK(csv.find("inf,") != std::string::npos);  // extrapolated rows present
  std::remove("cli_min.csv");
}

TEST_CASE("moduli figure and scan") {
  SUBCASE("threshold panel SVG") {
    const auto res = run("moduli --k 2 --a 0+0.0625i --svg cli_fig.svg");
    REQUIRE(res.exit_code == 0);
    const std::string svg = slurp("cli_fig.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("class=\"z1\"") != std::string::npos);
    std::remove("cli_fig.svg");
  }
  SUBCASE("scan counts across a*") {
    const auto res = run("moduli scan --k 5 --cells 384 --out -");
    REQUIRE(res.exit_code == 0);
    // rows: 0.5 a* -> 7 components, 2 a* -> 1
    CHECK(res.out.find(",7,") != std::string::npos);
    CHECK(res.out.find(",1,") != std::string::npos);
  }
  SUBCASE("a too-small explicit window exits 4 with a resize hint") {
    const auto res = run("moduli --k 2 --a 0+0.1i --window 1.5 --cells 128");
    CHECK(res.exit_code == 4);
  }
}

TEST_CASE("stability command verdicts") {
  SUBCASE("supercritical Zeeman: stable") {
    const auto res = run("stability --r 0.8 --h 0.2 --lambdas 1,2,4 --t-list 0.01 --out -");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("stable (all probes positive)") != std::string::npos);
  }
  SUBCASE("subcritical Zeeman: unstable with witness") {
    const auto res = run("stability --r 0.8 --h -0.1 --lambdas 1,20 --t-list 0.01 --out -");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("unstable (witness lambda,t attached)") != std::string::npos);
  }
  SUBCASE("flowing the unstable skyrmion at r = 1.5") {
    const auto res = run(
        "stability --r 1.5 --h 0 --family skyrmion:r=1.5 --max-iters 60 --out cli_flow.csv");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("unstable") != std::string::npos);
    const std::string log = slurp("cli_flow.csv");
    CHECK(log.rfind("iter,E,Q_raw,step\n", 0) == 0);
    std::remove("cli_flow.csv");
  }
}

TEST_CASE("config file supplies defaults, flags override, unknown keys rejected") {
  {
    std::ofstream cfg("cli_test.cfg");
    cfg << "# desk-scale run\n"
        << "family = skyrmion:r=0.5\n"
        << "r = 0.5\n"
        << "N = 129\n"
        << "S = 20\n";
  }
  const auto res = run("energy --config cli_test.cfg --out -");
  REQUIRE(res.exit_code == 0);
  CHECK(skylab::breakdown_from_json(res.out).N == 129);

  // flag beats the config value
  const auto res2 = run("energy --config cli_test.cfg --N 65 --out -");
  REQUIRE(res2.exit_code == 0);
  CHECK(skylab::breakdown_from_json(res2.out).N == 65);

  {
    std::ofstream cfg("cli_bad.cfg");
    cfg << "family = skyrmion:r=0.5\nwibble = 3\n";
  }
  CHECK(run("energy --config cli_bad.cfg --out -").exit_code == 2);
  std::remove("cli_test.cfg");
  std::remove("cli_bad.cfg");
}

TEST_CASE("byte-identical output across runs and thread counts") {
  const std::string args = "energy --family skyrmion:r=0.5 --r 0.5 --N 257 --out -";
  const auto a = run(args, "SKYRMION_LAB_THREADS=1");
  const auto b = run(args, "SKYRMION_LAB_THREADS=2");
  const auto c = run(args, "SKYRMION_LAB_THREADS=2");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(b.out == c.out);
}

TEST_CASE("the sampled field can be saved alongside the breakdown") {
  const auto res =
      run("energy --family cutoff_skyrmion:r=1,R=8 --r 1 --N 65 --S 6 --out - --save-field cli_field.sfld");
  REQUIRE(res.exit_code == 0);
  const auto f = skylab::read_sfld("cli_field.sfld");
  CHECK(f.n() == 65);
  CHECK(f.spec().half_width == 6.0);
  std::remove("cli_field.sfld");
}
