#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <unistd.h>

#include "whichpath/error.hpp"
#include "whichpath/experiment.hpp"

using namespace whichpath;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("whichpath_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

RunConfig config_for(Experiment e, const fs::path& out, std::size_t n = 20000) {
  RunConfig c;
  c.experiment = e;
  c.n_electrons = n;
  c.seed = 7;
  c.output_dir = out;
  c.total_time = 20.0;
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(WHICHPATH_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("experiment names") {
  for (auto e : {Experiment::G1, Experiment::G2, Experiment::G3, Experiment::G3EarlyOff, Experiment::Shelving}) {
    CHECK(parse_experiment(to_string(e)) == e);
  }
  CHECK_THROWS_AS(parse_experiment("g4"), InvalidArgument);
}

TEST_CASE("settings parsing") {
  const fs::path dir = scratch("settings");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "run.cfg");
    f << "# comment\nexperiment = g2\nn=1e4\nseed=3  # trailing\nwavelength=4e-8\n\n";
  }
  const auto settings = read_settings_file(dir / "run.cfg");
  const auto c = run_config_from_settings(settings);
  CHECK(c.experiment == Experiment::G2);
  CHECK(c.n_electrons == 10000);
  CHECK(c.seed == 3);
  CHECK(c.slit_parameters().de_broglie_wavelength == 4e-8);

  CHECK_THROWS_AS(run_config_from_settings({{"experiment", "g1"}, {"bogus", "1"}}), InvalidArgument);
  CHECK_THROWS_AS(run_config_from_settings({{"experiment", "g1"}, {"n", "12.5"}}), InvalidArgument);
  CHECK_THROWS_AS(run_config_from_settings({{"experiment", "g1"}, {"separation", "-1"}}), InvalidArgument);
  CHECK_THROWS_AS(run_config_from_settings({{"n", "10"}}), InvalidArgument);
  CHECK_THROWS_AS(run_config_from_settings({{"experiment", "shelving"}, {"shelve_rate", "1e4"}}), InvalidArgument);
  CHECK_THROWS_AS(read_settings_file(dir / "missing.cfg"), IoError);

  // The echo parses back to the same configuration.
  const auto echoed = run_config_from_settings(c.to_settings());
  CHECK(echoed.to_settings() == c.to_settings());
}

TEST_CASE("double-hole runs write self-describing outputs") {
  const fs::path out = scratch("g3");
  const auto m = run(config_for(Experiment::G3, out));
  CHECK(first_line(out / "density.csv") == "x_m,density_per_m,branch_a_per_m,branch_b_per_m");
  CHECK(first_line(out / "samples.csv") == "x_m,outcome");
  CHECK(slurp(out / "config.txt").find("seed=7\n") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["experiment"] == "g3");
  CHECK(summary.contains("chi2_p"));
  CHECK(summary.contains("chi2_not_seen_p"));
  CHECK(summary.contains("mirror_max_z"));
  CHECK(m.at("freq_seen_at_b") == 0.0);
  CHECK(m.at("freq_seen_at_a") == doctest::Approx(0.5).epsilon(0.05));
  CHECK(m.at("oracle_rel_l2_error") <= kOracleTolerance);

  std::ifstream samples(out / "samples.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(samples, line);
  while (std::getline(samples, line)) ++rows;
  CHECK(rows == 20000);
}

TEST_CASE("reruns are byte-identical and early light-off reproduces g1") {
  const fs::path a = scratch("g1_a"), b = scratch("g1_b"), c = scratch("g3e");
  const auto ma = run(config_for(Experiment::G1, a));
  run(config_for(Experiment::G1, b));
  const auto mc = run(config_for(Experiment::G3EarlyOff, c));
  for (const char* f : {"density.csv", "samples.csv", "summary.json"}) CHECK(slurp(a / f) == slurp(b / f));
  CHECK(slurp(a / "density.csv") == slurp(c / "density.csv"));
  CHECK(ma.at("visibility_analytic") == mc.at("visibility_analytic"));
  CHECK(ma.at("visibility_sampled") >= 0.9);
}

TEST_CASE("shelving run") {
  const fs::path out = scratch("shelving");
  const auto m = run(config_for(Experiment::Shelving, out));
  CHECK(first_line(out / "trajectory.csv") == "state,start_s,duration_s");
  CHECK(first_line(out / "photons.csv") == "t_s");
  CHECK(first_line(out / "dark_intervals.csv") == "start_s,end_s");
  CHECK(m.at("detector_recall") >= 0.99);
  CHECK(m.at("expected_dark_fraction") == doctest::Approx(2.0 / 3.0));
  const fs::path again = scratch("shelving_again");
  run(config_for(Experiment::Shelving, again));
  for (const char* f : {"trajectory.csv", "photons.csv", "dark_intervals.csv"}) CHECK(slurp(out / f) == slurp(again / f));
}

TEST_CASE("CLI exit codes") {
  const fs::path base = scratch("cli");
  fs::create_directories(base);

  CHECK(cli("run g1 --n 2000 --seed 7 --out " + (base / "ok").string()) == 0);
  CHECK(fs::exists(base / "ok" / "summary.json"));
  CHECK(cli("--experiment g2 --n 2000 --seed 1 --out " + (base / "flag").string()) == 0);

  CHECK(cli("run g9 --out " + (base / "bad").string()) == 1);
  CHECK(cli("run g1 --n 0 --out " + (base / "bad").string()) == 1);
  CHECK(cli("run g1 --separation -5 --out " + (base / "bad").string()) == 1);
  CHECK(cli("run g1 --unknown-flag 3") == 1);

  {
    std::ofstream blocker(base / "not_a_dir");
    blocker << "x";
  }
  CHECK(cli("run g1 --n 100 --out " + (base / "not_a_dir" / "sub").string()) == 3);

  // Far-field condition holds (w^2 / lambda L = 0.098) but the closed form
  // is visibly off the Fresnel integral.
  CHECK(cli("run g1 --n 100 --hole-width 7e-5 --separation 2e-4 --out " + (base / "num").string()) == 2);

  // Config file with a flag override.
  {
    std::ofstream f(base / "run.cfg");
    f << "experiment=g1\nn=500\nseed=4\nout=" << (base / "from_file").string() << "\n";
  }
  CHECK(cli("--config " + (base / "run.cfg").string() + " --seed 9") == 0);
  CHECK(slurp(base / "from_file" / "config.txt").find("seed=9\n") != std::string::npos);
}
