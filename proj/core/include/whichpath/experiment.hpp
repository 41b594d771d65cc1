#pragma once

// Batch runner for the double-hole experiments and the shelving simulation.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "whichpath/measurement.hpp"
#include "whichpath/shelving.hpp"

namespace whichpath {

enum class Experiment { G1, G2, G3, G3EarlyOff, Shelving };

std::string_view to_string(Experiment experiment);
/// Accepts g1, g2, g3, g3_early_off, shelving.
Experiment parse_experiment(std::string_view name);

/// Illumination regime of a double-hole experiment.
IlluminationConfig illumination_for(Experiment experiment);

struct RunConfig {
  Experiment experiment = Experiment::G1;
  std::size_t n_electrons = 100000;
  double total_time = 60.0;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  std::optional<double> wavelength;
  std::optional<double> hole_width;
  std::optional<double> separation;
  std::optional<double> distance;

  VSystemRates rates;
  double dark_threshold = kDefaultDarkThreshold;

  SlitParameters slit_parameters() const;
  /// Resolved settings as key=value pairs; every key is present, including the seed.
  std::map<std::string, std::string> to_settings() const;
};

using Settings = std::map<std::string, std::string>;

/// Parses a key=value file; '#' starts a comment. Throws IoError or InvalidArgument.
Settings read_settings_file(const std::filesystem::path& path);

/// Builds a validated RunConfig. Unknown keys and malformed values throw InvalidArgument.
RunConfig run_config_from_settings(const Settings& settings);

/// Positions and outcomes of individually simulated electrons.
struct ElectronRun {
  std::vector<double> positions;
  std::vector<OutcomeTag> outcomes;
  std::array<std::size_t, 3> outcome_counts{};

  /// Positions whose outcome is `tag`.
  std::vector<double> positions_with(OutcomeTag tag) const;
};

/// One trial per electron: apply_measurement on the coherent superposition,
/// then a Born-rule draw from the post-measurement state.
ElectronRun simulate_electrons(const std::shared_ptr<const TwoHoleSetup>& setup, const IlluminationConfig& config,
                               std::size_t n, Rng& rng);

/// Flat metrics written to summary.json.
using Metrics = std::map<std::string, double>;

/// Largest accepted error between the far-field amplitudes and the Fresnel oracle.
inline constexpr double kOracleTolerance = 1e-3;

/// Runs one experiment and writes density.csv / samples.csv (or trajectory.csv,
/// photons.csv, dark_intervals.csv), summary.json and config.txt into the
/// output directory. Throws InvalidArgument, NumericalError or IoError.
Metrics run(const RunConfig& config);

/// std::to_chars shortest round-trip form.
std::string format_double(double value);

}  // namespace whichpath
