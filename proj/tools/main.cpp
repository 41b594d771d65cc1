// whichpath: batch runner for the double-hole experiments and electron shelving.
//
//   whichpath run g1 --n 100000 --seed 7 --out out/g1
//   whichpath --experiment shelving --total-time 120 --seed 3 --out out/shelf
//
// Exit codes: 0 success, 1 invalid config, 2 numerical failure, 3 I/O failure.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "whichpath/error.hpp"
#include "whichpath/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalidConfig = 1, kNumericalFailure = 2, kIoFailure = 3 };

int fail(int code, std::string_view kind, std::string message) {
  for (auto& c : message) {
    if (c == '\n' || c == '"') c = ' ';
  }
  std::cerr << "error: code=" << code << " kind=" << kind << " message=\"" << message << "\"\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-hole which-path and electron-shelving simulations"};
  app.set_version_flag("--version", "whichpath 0.1.0");

  std::vector<std::string> words;
  std::string config_file;
  whichpath::Settings flags;
  std::string experiment, n, total_time, seed, out, wavelength, hole_width, separation, distance;
  std::string fluorescence_rate, shelve_rate, deshelve_rate, dark_threshold;

  app.add_option("command", words, "Optional 'run' followed by the experiment name")->expected(0, 2);
  app.add_option("--experiment", experiment, "g1, g2, g3, g3_early_off or shelving");
  app.add_option("--n", n, "Number of electrons (double-hole experiments)");
  app.add_option("--total-time", total_time, "Simulated time in seconds (shelving)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--config", config_file, "key=value config file; flags win on conflict");
  app.add_option("--wavelength", wavelength, "de Broglie wavelength [m]");
  app.add_option("--hole-width", hole_width, "Width of each hole [m]");
  app.add_option("--separation", separation, "Hole center-to-center separation [m]");
  app.add_option("--distance", distance, "Wall to backstop distance [m]");
  app.add_option("--fluorescence-rate", fluorescence_rate, "Bright-state photon rate [1/s]");
  app.add_option("--shelve-rate", shelve_rate, "Bright to dark rate [1/s]");
  app.add_option("--deshelve-rate", deshelve_rate, "Dark to bright rate [1/s]");
  app.add_option("--dark-threshold", dark_threshold, "Photon-free time that declares the dark state [s]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kInvalidConfig, "invalid_config", e.what());
  }

  try {
    whichpath::Settings settings;
    if (!config_file.empty()) settings = whichpath::read_settings_file(config_file);

    if (!words.empty() && words.front() == "run") words.erase(words.begin());
    if (words.size() > 1) throw whichpath::InvalidArgument("unexpected positional argument '" + words[1] + "'");
    if (words.size() == 1) settings["experiment"] = words.front();

    auto overlay = [&](const char* key, const std::string& value) {
      if (!value.empty()) settings[key] = value;
    };
    overlay("experiment", experiment);
    overlay("n", n);
    overlay("total_time", total_time);
    overlay("seed", seed);
    overlay("out", out);
    overlay("wavelength", wavelength);
    overlay("hole_width", hole_width);
    overlay("separation", separation);
    overlay("distance", distance);
    overlay("fluorescence_rate", fluorescence_rate);
    overlay("shelve_rate", shelve_rate);
    overlay("deshelve_rate", deshelve_rate);
    overlay("dark_threshold", dark_threshold);

    const whichpath::RunConfig config = whichpath::run_config_from_settings(settings);
    const whichpath::Metrics metrics = whichpath::run(config);
    std::cout << "experiment=" << whichpath::to_string(config.experiment) << " out=" << config.output_dir.string()
              << "\n";
    for (const auto& [key, value] : metrics) std::cout << key << "=" << whichpath::format_double(value) << "\n";
    return kOk;
  } catch (const whichpath::InvalidArgument& e) {
    return fail(kInvalidConfig, "invalid_config", e.what());
  } catch (const whichpath::NumericalError& e) {
    return fail(kNumericalFailure, "numerical_failure", e.what());
  } catch (const whichpath::IoError& e) {
    return fail(kIoFailure, "io_failure", e.what());
  } catch (const std::exception& e) {
    return fail(kNumericalFailure, "internal_failure", e.what());
  }
}
