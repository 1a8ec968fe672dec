#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "../tools/cli.hpp"
#include "chwfr/io.hpp"
#include "test_support.hpp"

using namespace chwfr;
using chwfr::io::Json;

namespace {

struct Outcome {
  int code;
  std::string text;
  Json json;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream os;
  const int code = cli::run(args, os);
  Outcome o{code, os.str(), {}};
  o.json = Json::parse(o.text);
  return o;
}

std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / ("chwfr_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(f, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("cone distance command") {
  const Outcome o = run({"cone", "dist", "--x1", "0", "--m1", "1", "--x2", "0", "--m2", "4"});
  REQUIRE(o.code == 0);
  CHECK(o.json["distance"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cone geodesic command") {
  const Outcome o = run({"cone", "geodesic", "--x", "0.2", "--m", "1", "--dx", "0.5", "--dm", "0.1"});
  REQUIRE(o.code == 0);
  CHECK(o.json["closed_form_error"].get<double>() < 1e-6);
  const Outcome apex = run({"cone", "geodesic", "--m", "1", "--dx", "0", "--dm", "-1", "--t-final", "3"});
  CHECK(apex.code == 2);
  CHECK(apex.json["error"]["kind"] == "apex_crossing");
}

TEST_CASE("invalid input exits with code 1 and an error object") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"cone", "dist", "--m1", "-1"},
           {"ch", "solve", "--init", "nonsense:1"},
           {"ch", "solve", "--n", "7"},
           {"wfr", "solve", "--nt", "2"},
           {"minimality"},
           {"no-such-command"},
           {"--a", "-1", "cone", "dist"}}) {
    const Outcome o = run(args);
    CHECK(o.code == 1);
    CHECK(o.json["error"]["kind"] == "invalid_input");
    CHECK(o.json["error"]["message"].is_string());
  }
}

TEST_CASE("solver failures exit with code 2 and diagnostics") {
  const Outcome breaking = run({"ch", "solve", "--init", "sin:3", "--n", "64", "--t-final", "2", "--dt", "1e-3"});
  CHECK(breaking.code == 2);
  CHECK(breaking.json["error"]["kind"] == "wave_breaking");
  const Outcome stuck = run({"wfr", "solve", "--rho0", "const:1", "--rho1", "bump:1,0.3,1", "--n", "32", "--nt", "8",
                             "--max-iters", "20"});
  CHECK(stuck.code == 2);
  CHECK(stuck.json["error"]["kind"] == "non_convergence");
  CHECK(stuck.json["error"]["iterations"].get<int>() == 20);
  CHECK(stuck.json["error"].contains("constraint_residual"));
  const Outcome infeasible = run({"wfr", "solve", "--rho0", "const:1", "--rho1", "const:2", "--n", "16", "--nt", "8", "--balanced"});
  CHECK(infeasible.code == 2);
  CHECK(infeasible.json["error"]["kind"] == "infeasible");
}

TEST_CASE("identical wfr inputs give distance zero") {
  const Outcome o = run({"wfr", "solve", "--rho0", "bump:2,0.5,1", "--rho1", "bump:2,0.5,1", "--n", "32", "--nt", "8"});
  REQUIRE(o.code == 0);
  CHECK(o.json["distance"].get<double>() < 1e-6);
  const Outcome h = run({"wfr", "hellinger", "--rho0", "const:1", "--rho1", "const:4", "--n", "16"});
  REQUIRE(h.code == 0);
  CHECK(h.json["distance"].get<double>() == doctest::Approx(std::sqrt(kTwoPi)));
}

TEST_CASE("output is byte-for-byte deterministic") {
  const std::vector<std::string> args{"wfr", "solve", "--rho0", "bump:2,0.5,1", "--rho1", "bump:3,0.5,1.5",
                                      "--n", "32", "--nt", "8", "--tol", "1e-5"};
  const Outcome a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.text == b.text);
  const Outcome c = run({"ch", "solve", "--init", "sin:0.2", "--n", "32", "--t-final", "0.1", "--dt", "0.01"});
  const Outcome d = run({"ch", "solve", "--init", "sin:0.2", "--n", "32", "--t-final", "0.1", "--dt", "0.01"});
  CHECK(c.text == d.text);
  // Floats carry 17 significant digits.
  const Outcome e = run({"ch", "solve", "--init", "sin:0.2", "--n", "32", "--t-final", "0.2", "--dt", "0.1"});
  CHECK(e.text.find("\"dt\": 0.10000000000000001") != std::string::npos);
}

TEST_CASE("constant initial data gives a constant trajectory file") {
  const auto dir = scratch_dir();
  const std::string path = (dir / "const.csv").string();
  const Outcome o = run({"ch", "solve", "--init", "const:1", "--n", "16", "--t-final", "0.1", "--dt", "0.01", "--out", path});
  REQUIRE(o.code == 0);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 1 + 11 * 16);
  CHECK(lines[0] == "t,x,u");
  const CHTrajectory tr = io::read_trajectory_csv(path, ConeParams{});
  CHECK(tr.size() == 11);
  for (const Field& u : tr.u)
    for (double v : u) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density CSV round trip is bit-identical") {
  std::mt19937_64 rng(70);
  DensityField rho = testing::random_trig(rng, 64, 8, 0.3, 1.0);
  rho[3] = 1.0 / 3.0;
  rho[4] = 5e-324;
  const std::string path = (scratch_dir() / "rho.csv").string();
  io::write_density_csv(path, rho);
  const DensityField back = io::read_density_csv(path);
  REQUIRE(back.size() == rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) CHECK(back[i] == rho[i]);
  // Read through the init language as well.
  const Outcome o = run({"wfr", "hellinger", "--rho0", "file:" + path, "--rho1", "file:" + path, "--n", "64"});
  REQUIRE(o.code == 0);
  CHECK(o.json["distance"].get<double>() == 0.0);
  const Outcome wrong = run({"wfr", "hellinger", "--rho0", "file:" + path, "--rho1", "const:1", "--n", "32"});
  CHECK(wrong.code == 1);
}

TEST_CASE("config file values sit between defaults and flags") {
  const auto cfg = scratch_dir() / "run.ini";
  {
    std::ofstream f(cfg);
    f << "[ch.solve]\nn=32\nt-final=0.05\ndt=0.01\ninit=\"sin:0.1\"\n";
  }
  const Outcome from_file = run({"--config", cfg.string(), "ch", "solve"});
  REQUIRE(from_file.code == 0);
  CHECK(from_file.json["n"] == 32);
  CHECK(from_file.json["t_final"].get<double>() == doctest::Approx(0.05));
  const Outcome flag = run({"--config", cfg.string(), "ch", "solve", "--n", "64"});
  REQUIRE(flag.code == 0);
  CHECK(flag.json["n"] == 64);
  CHECK(flag.json["t_final"].get<double>() == doctest::Approx(0.05));
}

TEST_CASE("output directory override") {
  const auto dir = scratch_dir() / "outdir";
  ::setenv("CHWFR_OUTPUT_DIR", dir.c_str(), 1);
  const Outcome o = run({"lift", "--rho", "const:1", "--x", "sin:1", "--n", "16", "--out", "phi.csv"});
  ::unsetenv("CHWFR_OUTPUT_DIR");
  REQUIRE(o.code == 0);
  CHECK(std::filesystem::exists(dir / "phi.csv"));
  CHECK(o.json["output"] == (dir / "phi.csv").string());
  const DensityField phi = io::read_density_csv((dir / "phi.csv").string());
  PeriodicGrid g(16);
  for (int i = 0; i < 16; ++i) CHECK(phi[i] == doctest::Approx(0.4 * std::sin(g.x(i))).epsilon(1e-12).scale(1.0));
}

TEST_CASE("euler check on the reference run") {
  const Outcome o = run({"euler", "check", "--init", "sin:0.2", "--n", "128", "--t-final", "0.2", "--dt", "1e-3"});
  REQUIRE(o.code == 0);
  CHECK(o.json["max_div"].get<double>() < 1e-10);
  CHECK(o.json["max_momentum_residual"].get<double>() < 1e-5);
  CHECK(o.json["jac_det_residual"].get<double>() < 1e-10);
}

TEST_CASE("remaining commands produce summaries") {
  CHECK(run({"ch", "invariants", "--init", "sin:0.2", "--n", "64"}).json["energy"].get<double>() ==
        doctest::Approx(kPi * 0.05));
  const Outcome flow = run({"flow", "horizontal", "--rho0", "const:1", "--phi0", "const:0.5", "--n", "16", "--t-final", "1", "--dt", "1e-2"});
  REQUIRE(flow.code == 0);
  CHECK(flow.json["action"].get<double>() == doctest::Approx(kPi / 2).epsilon(1e-6));
  const Outcome curv = run({"curvature", "--v1", "sin:1", "--v2", "bump:1,0.5,1", "--n", "64"});
  REQUIRE(curv.code == 0);
  const Outcome mini = run({"minimality", "--init", "const:1", "--n", "32", "--t-final", "1", "--dt", "0.05", "--seed", "7", "--count", "5"});
  REQUIRE(mini.code == 0);
  CHECK(mini.json["hessian_bound"].get<double>() == doctest::Approx(1.0));
  CHECK(mini.json["violations"] == 0);
  std::ostringstream help;
  CHECK(cli::run({"--help"}, help) == 0);
  CHECK(help.str().find("minimality") != std::string::npos);
}
