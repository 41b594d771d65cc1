#include "whichpath/experiment.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "whichpath/error.hpp"
#include "whichpath/optics.hpp"
#include "whichpath/stats.hpp"

namespace whichpath {

namespace {

constexpr std::size_t kChiSquareBins = 400;
constexpr std::size_t kMirrorBins = 100;
constexpr std::size_t kMinFitSamples = 100;

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericalError("failed to format a floating-point value");
  return std::string(buf, end);
}

std::string_view to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::G1: return "g1";
    case Experiment::G2: return "g2";
    case Experiment::G3: return "g3";
    case Experiment::G3EarlyOff: return "g3_early_off";
    case Experiment::Shelving: return "shelving";
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  for (auto e : {Experiment::G1, Experiment::G2, Experiment::G3, Experiment::G3EarlyOff, Experiment::Shelving}) {
    if (to_string(e) == name) return e;
  }
  throw InvalidArgument("unknown experiment '" + std::string(name) + "'");
}

IlluminationConfig illumination_for(Experiment experiment) {
  switch (experiment) {
    case Experiment::G1: return {IlluminationMode::Off, false, 1.0};
    case Experiment::G2: return {IlluminationMode::BothHoles, true, 1.0};
    case Experiment::G3: return {IlluminationMode::HoleAOnly, true, 1.0};
    case Experiment::G3EarlyOff: return {IlluminationMode::HoleAOnly, false, 1.0};
    case Experiment::Shelving: break;
  }
  throw InvalidArgument("the shelving experiment has no illumination regime");
}

// ---------------------------------------------------------------------------
// Configuration

SlitParameters RunConfig::slit_parameters() const {
  SlitParameters p;
  if (wavelength) p.de_broglie_wavelength = *wavelength;
  if (hole_width) p.hole_width_a = p.hole_width_b = *hole_width;
  if (separation) p.hole_separation = *separation;
  if (distance) p.wall_to_backstop = *distance;
  return p;
}

Settings RunConfig::to_settings() const {
  const SlitParameters p = slit_parameters();
  Settings s;
  s["experiment"] = std::string(to_string(experiment));
  s["n"] = std::to_string(n_electrons);
  s["total_time"] = format_double(total_time);
  s["seed"] = std::to_string(seed);
  s["out"] = output_dir.string();
  s["wavelength"] = format_double(p.de_broglie_wavelength);
  s["hole_width"] = format_double(p.hole_width_a);
  s["separation"] = format_double(p.hole_separation);
  s["distance"] = format_double(p.wall_to_backstop);
  s["fluorescence_rate"] = format_double(rates.fluorescence_rate);
  s["shelve_rate"] = format_double(rates.shelve_rate);
  s["deshelve_rate"] = format_double(rates.deshelve_rate);
  s["dark_threshold"] = format_double(dark_threshold);
  return s;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
    throw InvalidArgument("setting '" + key + "': not a number: '" + value + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec == std::errc() && ptr == value.data() + value.size()) return v;
  // Accept integral scientific notation such as 1e5.
  const double d = parse_double(key, value);
  if (d < 0.0 || d > 9007199254740992.0 || d != std::floor(d)) {
    throw InvalidArgument("setting '" + key + "': not a nonnegative integer: '" + value + "'");
  }
  return static_cast<std::uint64_t>(d);
}

}  // namespace

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  Settings out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[trim(std::string_view(body).substr(0, eq))] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

RunConfig run_config_from_settings(const Settings& settings) {
  RunConfig c;
  for (const auto& [key, value] : settings) {
    if (key == "experiment") {
      c.experiment = parse_experiment(value);
    } else if (key == "n") {
      c.n_electrons = parse_count(key, value);
    } else if (key == "total_time") {
      c.total_time = parse_double(key, value);
    } else if (key == "seed") {
      c.seed = parse_count(key, value);
    } else if (key == "out") {
      c.output_dir = value;
    } else if (key == "wavelength") {
      c.wavelength = parse_double(key, value);
    } else if (key == "hole_width") {
      c.hole_width = parse_double(key, value);
    } else if (key == "separation") {
      c.separation = parse_double(key, value);
    } else if (key == "distance") {
      c.distance = parse_double(key, value);
    } else if (key == "fluorescence_rate") {
      c.rates.fluorescence_rate = parse_double(key, value);
    } else if (key == "shelve_rate") {
      c.rates.shelve_rate = parse_double(key, value);
    } else if (key == "deshelve_rate") {
      c.rates.deshelve_rate = parse_double(key, value);
    } else if (key == "dark_threshold") {
      c.dark_threshold = parse_double(key, value);
    } else {
      throw InvalidArgument("unknown setting '" + key + "'");
    }
  }
  if (!settings.contains("experiment")) throw InvalidArgument("no experiment given");
  if (c.output_dir.empty()) throw InvalidArgument("output directory must not be empty");
  if (c.experiment == Experiment::Shelving) {
    c.rates.validate();
    if (!(c.total_time > 0.0)) throw InvalidArgument("total_time must be positive");
    if (!(c.dark_threshold > 0.0)) throw InvalidArgument("dark_threshold must be positive");
  } else {
    if (c.n_electrons == 0) throw InvalidArgument("n must be at least 1");
    SlitGeometry::create(c.slit_parameters());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Electron trials

std::vector<double> ElectronRun::positions_with(OutcomeTag tag) const {
  std::vector<double> out;
  out.reserve(outcome_counts[static_cast<std::size_t>(tag)]);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (outcomes[i] == tag) out.push_back(positions[i]);
  }
  return out;
}

ElectronRun simulate_electrons(const std::shared_ptr<const TwoHoleSetup>& setup, const IlluminationConfig& config,
                               std::size_t n, Rng& rng) {
  const ConditionalState initial = ConditionalState::coherent_superposition(setup);
  // Post-measurement states repeat; samplers are keyed by branch storage.
  std::unordered_map<const void*, InverseCdfSampler> samplers;
  ElectronRun run;
  run.positions.reserve(n);
  run.outcomes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const MeasurementResult result = apply_measurement(initial, config, rng);
    const auto& state = result.state;
    double x = 0.0;
    if (state.branches().size() == 1) {
      const void* key = state.branches().front().amplitude.storage_id();
      auto it = samplers.find(key);
      if (it == samplers.end()) it = samplers.emplace(key, InverseCdfSampler(state.density())).first;
      x = it->second.draw(rng);
    } else {
      x = InverseCdfSampler(state.density()).draw(rng);
    }
    run.positions.push_back(x);
    run.outcomes.push_back(result.outcome.tag);
    ++run.outcome_counts[static_cast<std::size_t>(result.outcome.tag)];
  }
  return run;
}

// ---------------------------------------------------------------------------
// Output

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void write_summary(const std::filesystem::path& dir, const RunConfig& config, const Metrics& metrics) {
  nlohmann::json j = nlohmann::json::object();
  j["experiment"] = std::string(to_string(config.experiment));
  for (const auto& [k, v] : metrics) j[k] = v;
  write_file(dir / "summary.json", j.dump(2) + "\n");

  std::string echo;
  for (const auto& [k, v] : config.to_settings()) echo += k + "=" + v + "\n";
  write_file(dir / "config.txt", echo);
}

void add_fit(Metrics& m, const std::string& prefix, std::span<const double> positions, const RealDensity& density) {
  if (positions.size() < kMinFitSamples) return;
  const auto h = histogram(positions, kChiSquareBins, density.geometry().extent());
  const auto fit = chi_square_gof(h, density);
  m[prefix + "_statistic"] = fit.statistic;
  m[prefix + "_dof"] = static_cast<double>(fit.dof);
  m[prefix + "_p"] = fit.p_value;
}

Metrics run_double_hole(const RunConfig& config) {
  const SlitGeometry geometry = SlitGeometry::create(config.slit_parameters());
  const auto setup = TwoHoleSetup::prepare(geometry);

  const std::array<Hole, 2> both{Hole::A, Hole::B};
  const double oracle_error = aligned_relative_l2_error(fresnel_oracle(geometry, both), setup->superposition());
  if (!(oracle_error <= kOracleTolerance)) {
    throw NumericalError("far-field amplitude diverges from the Fresnel oracle, relative L2 error " +
                         format_double(oracle_error));
  }

  const IlluminationConfig illumination = illumination_for(config.experiment);
  Rng rng(config.seed);
  const ElectronRun electrons = simulate_electrons(setup, illumination, config.n_electrons, rng);
  const RealDensity ensemble = ensemble_density(*setup, illumination);
  const Window window = central_window(geometry);

  Metrics m;
  m["n_electrons"] = static_cast<double>(config.n_electrons);
  m["seed"] = static_cast<double>(config.seed);
  m["oracle_rel_l2_error"] = oracle_error;
  m["visibility_analytic"] = visibility(ensemble, window);
  m["visibility_sampled"] = sampled_visibility(electrons.positions, window, geometry.fringe_period());
  for (auto tag : {OutcomeTag::SeenAtA, OutcomeTag::SeenAtB, OutcomeTag::NotSeen}) {
    m["freq_" + std::string(to_string(tag))] = static_cast<double>(electrons.outcome_counts[static_cast<std::size_t>(tag)]) /
                                               static_cast<double>(config.n_electrons);
  }
  add_fit(m, "chi2", electrons.positions, ensemble);
  add_fit(m, "chi2_vs_interference", electrons.positions, setup->interference_density());
  add_fit(m, "chi2_vs_which_path", electrons.positions, setup->which_path_density());

  const bool branched = config.experiment == Experiment::G2 || config.experiment == Experiment::G3;
  if (branched) {
    for (auto tag : {OutcomeTag::SeenAtA, OutcomeTag::SeenAtB, OutcomeTag::NotSeen}) {
      const MeasurementOutcome outcome{tag, illumination.normalized().window_complete};
      if (electrons.outcome_counts[static_cast<std::size_t>(tag)] == 0) continue;
      add_fit(m, "chi2_" + std::string(to_string(tag)), electrons.positions_with(tag),
              conditional_density(*setup, illumination, outcome));
    }
  }
  if (config.experiment == Experiment::G3) {
    const auto a = electrons.positions_with(OutcomeTag::SeenAtA);
    const auto b = electrons.positions_with(OutcomeTag::NotSeen);
    if (!a.empty() && !b.empty()) {
      const auto ha = histogram(a, kMirrorBins, geometry.extent());
      const auto hb = histogram(b, kMirrorBins, geometry.extent());
      m["mirror_max_z"] = max_two_sample_z(hb, ha.mirrored());
    }
  }

  // density.csv
  std::string csv = branched ? "x_m,density_per_m,branch_a_per_m,branch_b_per_m\n" : "x_m,density_per_m\n";
  const auto& da = setup->single_hole_density(Hole::A);
  const auto& db = setup->single_hole_density(Hole::B);
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    csv += format_double(geometry.x(i));
    csv += ',';
    csv += format_double(ensemble.values()[i]);
    if (branched) {
      csv += ',';
      csv += format_double(da.values()[i]);
      csv += ',';
      csv += format_double(db.values()[i]);
    }
    csv += '\n';
  }
  write_file(config.output_dir / "density.csv", csv);

  std::string samples = "x_m,outcome\n";
  samples.reserve(electrons.positions.size() * 32);
  for (std::size_t i = 0; i < electrons.positions.size(); ++i) {
    samples += format_double(electrons.positions[i]);
    samples += ',';
    samples += to_string(electrons.outcomes[i]);
    samples += '\n';
  }
  write_file(config.output_dir / "samples.csv", samples);
  return m;
}

Metrics run_shelving(const RunConfig& config) {
  Rng rng(config.seed);
  const TelegraphTrajectory trajectory = simulate_trajectory(config.rates, config.total_time, rng);
  const PhotonRecord photons = emit_photons(trajectory, config.rates, rng);
  const auto detected = detect_jumps(photons, config.dark_threshold);
  const DetectorScore score = score_detections(trajectory, detected, config.dark_threshold);

  Metrics m;
  m["seed"] = static_cast<double>(config.seed);
  m["total_time_s"] = config.total_time;
  m["dark_threshold_s"] = config.dark_threshold;
  m["n_photons"] = static_cast<double>(photons.arrival_times.size());
  m["dark_fraction"] = trajectory.time_in(FluorescenceState::Dark) / trajectory.total_time;
  m["expected_dark_fraction"] = config.rates.dark_fraction();
  m["expected_mean_bright_s"] = 1.0 / config.rates.shelve_rate;
  m["expected_mean_dark_s"] = 1.0 / config.rates.deshelve_rate;
  for (auto [state, name, rate] : {std::tuple{FluorescenceState::Bright, "bright", config.rates.shelve_rate},
                                   std::tuple{FluorescenceState::Dark, "dark", config.rates.deshelve_rate}}) {
    const auto durations = trajectory.completed_durations(state);
    m[std::string("n_") + name + "_intervals"] = static_cast<double>(durations.size());
    if (!durations.empty()) {
      double sum = 0.0;
      for (double d : durations) sum += d;
      m[std::string("mean_") + name + "_s"] = sum / static_cast<double>(durations.size());
    }
    if (durations.size() >= 10) m[std::string("ks_p_") + name] = ks_exponential(durations, rate).p_value;
  }
  m["detector_detections"] = static_cast<double>(score.detections);
  m["detector_false_detections"] = static_cast<double>(score.false_detections);
  m["detector_long_dark_intervals"] = static_cast<double>(score.long_dark_intervals);
  m["detector_recall"] = score.recall;
  m["detector_fdr"] = score.false_discovery_rate;
  m["detector_max_latency_s"] = score.max_latency;
  m["detector_latency_violations"] = static_cast<double>(score.latency_violations);

  std::string traj = "state,start_s,duration_s\n";
  for (const auto& iv : trajectory.intervals) {
    traj += iv.state == FluorescenceState::Bright ? "bright," : "dark,";
    traj += format_double(iv.start);
    traj += ',';
    traj += format_double(iv.duration);
    traj += '\n';
  }
  write_file(config.output_dir / "trajectory.csv", traj);

  std::string ph = "t_s\n";
  ph.reserve(photons.arrival_times.size() * 20);
  for (double t : photons.arrival_times) {
    ph += format_double(t);
    ph += '\n';
  }
  write_file(config.output_dir / "photons.csv", ph);

  std::string dark = "start_s,end_s\n";
  for (const auto& d : detected) {
    dark += format_double(d.start);
    dark += ',';
    dark += format_double(d.end);
    dark += '\n';
  }
  write_file(config.output_dir / "dark_intervals.csv", dark);
  return m;
}

}  // namespace

Metrics run(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.output_dir.string() + ": " + ec.message());

  const Metrics m = config.experiment == Experiment::Shelving ? run_shelving(config) : run_double_hole(config);
  write_summary(config.output_dir, config, m);
  return m;
}

}  // namespace whichpath
