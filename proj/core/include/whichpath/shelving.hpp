#pragma once

// Electron shelving as a two-state telegraph process: a bright state that
// fluoresces at a high rate and a shelved dark state that emits nothing. Dark
// periods are inferred purely from the absence of photons.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "whichpath/random.hpp"

namespace whichpath {

struct VSystemRates {
  /// Photons per second while bright.
  double fluorescence_rate = 1e5;
  /// Bright -> dark, per second.
  double shelve_rate = 1.0;
  /// Dark -> bright, per second.
  double deshelve_rate = 0.5;

  /// All rates positive and fluorescence_rate >= 100 * max(shelve, deshelve).
  void validate() const;
  /// Stationary fraction of time spent dark.
  double dark_fraction() const { return shelve_rate / (shelve_rate + deshelve_rate); }
};

/// Default dark threshold, 1e-4 * ln(1e4) s (about 0.92 ms).
inline const double kDefaultDarkThreshold = 1e-4 * std::log(1e4);

/// Threshold whose per-gap false-dark probability exp(-R_f tau) equals `p`.
double dark_threshold_for_false_rate(const VSystemRates& rates, double p);

enum class FluorescenceState { Bright, Dark };

struct TelegraphInterval {
  FluorescenceState state = FluorescenceState::Bright;
  double start = 0.0;
  double duration = 0.0;
};

struct TelegraphTrajectory {
  std::vector<TelegraphInterval> intervals;
  double total_time = 0.0;

  /// Durations of intervals in `state`, excluding the final interval, which
  /// is cut off at total_time.
  std::vector<double> completed_durations(FluorescenceState state) const;
  /// Total time spent in `state`, including the truncated final interval.
  double time_in(FluorescenceState state) const;
  std::size_t count(FluorescenceState state) const;
};

struct PhotonRecord {
  std::vector<double> arrival_times;
  double total_time = 0.0;
};

struct DarkInterval {
  double start = 0.0;
  double end = 0.0;
};

/// Continuous-time two-state Markov chain starting Bright, truncated at total_time.
TelegraphTrajectory simulate_trajectory(const VSystemRates& rates, double total_time, Rng& rng);

/// Calls sink(t) for every fluorescence photon in time order: a Poisson
/// stream at fluorescence_rate during bright intervals and nothing while dark.
template <class Sink>
void stream_photons(const TelegraphTrajectory& trajectory, const VSystemRates& rates, Rng& rng, Sink&& sink) {
  for (const auto& interval : trajectory.intervals) {
    if (interval.state != FluorescenceState::Bright) continue;
    const double end = interval.start + interval.duration;
    double t = interval.start + rng.exponential(rates.fluorescence_rate);
    while (t < end) {
      sink(t);
      t += rng.exponential(rates.fluorescence_rate);
    }
  }
}

PhotonRecord emit_photons(const TelegraphTrajectory& trajectory, const VSystemRates& rates, Rng& rng);

/// Online negative-observation detector. A gap longer than the threshold
/// becomes a dark interval that starts one threshold after the last photon
/// (the moment the absence becomes conclusive) and ends at the next photon.
/// A gap at the very start of the record is anchored at t = 0.
class DarkIntervalDetector {
 public:
  explicit DarkIntervalDetector(double dark_threshold);

  void observe(double arrival_time);
  /// Closes the record at `total_time` and returns the inferred intervals.
  std::vector<DarkInterval> finish(double total_time);

  double threshold() const { return threshold_; }

 private:
  double threshold_;
  double last_ = 0.0;
  bool seen_any_ = false;
  std::vector<DarkInterval> found_;
};

std::vector<DarkInterval> detect_jumps(const PhotonRecord& record, double dark_threshold);

/// Interval-level comparison of inferred dark intervals with the ground truth.
struct DetectorScore {
  /// Ground-truth dark intervals longer than twice the threshold.
  std::size_t long_dark_intervals = 0;
  std::size_t recalled = 0;
  std::size_t detections = 0;
  /// Detections overlapping no ground-truth dark interval.
  std::size_t false_detections = 0;
  double recall = 0.0;
  double false_discovery_rate = 0.0;
  /// Largest detection delay after the true shelving time, over recalled intervals.
  double max_latency = 0.0;
  /// Recalled intervals whose first detection does not start within [0, threshold] of the truth.
  std::size_t latency_violations = 0;
};

DetectorScore score_detections(const TelegraphTrajectory& truth, std::span<const DarkInterval> detected,
                               double dark_threshold);

}  // namespace whichpath
