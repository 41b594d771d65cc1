#include "whichpath/shelving.hpp"

#include <algorithm>
#include <numeric>

#include "whichpath/error.hpp"

namespace whichpath {

void VSystemRates::validate() const {
  auto positive = [](double r) { return std::isfinite(r) && r > 0.0; };
  if (!positive(fluorescence_rate) || !positive(shelve_rate) || !positive(deshelve_rate)) {
    throw InvalidArgument("shelving rates must be positive and finite");
  }
  if (fluorescence_rate < 100.0 * std::max(shelve_rate, deshelve_rate)) {
    throw InvalidArgument("fluorescence_rate must be at least 100 times the shelving and deshelving rates");
  }
}

double dark_threshold_for_false_rate(const VSystemRates& rates, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("false-dark probability must lie in (0, 1)");
  return -std::log(p) / rates.fluorescence_rate;
}

std::vector<double> TelegraphTrajectory::completed_durations(FluorescenceState state) const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < intervals.size(); ++i) {
    if (intervals[i].state == state) out.push_back(intervals[i].duration);
  }
  return out;
}

double TelegraphTrajectory::time_in(FluorescenceState state) const {
  double sum = 0.0;
  for (const auto& iv : intervals) {
    if (iv.state == state) sum += iv.duration;
  }
  return sum;
}

std::size_t TelegraphTrajectory::count(FluorescenceState state) const {
  return static_cast<std::size_t>(
      std::count_if(intervals.begin(), intervals.end(), [state](const auto& iv) { return iv.state == state; }));
}

TelegraphTrajectory simulate_trajectory(const VSystemRates& rates, double total_time, Rng& rng) {
  rates.validate();
  if (!(total_time > 0.0) || !std::isfinite(total_time)) throw InvalidArgument("total_time must be positive");

  TelegraphTrajectory out;
  out.total_time = total_time;
  double t = 0.0;
  FluorescenceState state = FluorescenceState::Bright;
  while (t < total_time) {
    const double rate = state == FluorescenceState::Bright ? rates.shelve_rate : rates.deshelve_rate;
    const double dwell = rng.exponential(rate);
    const double duration = std::min(dwell, total_time - t);
    if (duration > 0.0) out.intervals.push_back({state, t, duration});
    t += dwell;
    state = state == FluorescenceState::Bright ? FluorescenceState::Dark : FluorescenceState::Bright;
  }
  return out;
}

PhotonRecord emit_photons(const TelegraphTrajectory& trajectory, const VSystemRates& rates, Rng& rng) {
  rates.validate();
  PhotonRecord record;
  record.total_time = trajectory.total_time;
  stream_photons(trajectory, rates, rng, [&](double t) {
    // Exponential gaps are strictly positive, but adjacent sums can round
    // onto the same double at very high rates.
    if (record.arrival_times.empty() || t > record.arrival_times.back()) record.arrival_times.push_back(t);
  });
  return record;
}

// ---------------------------------------------------------------------------

DarkIntervalDetector::DarkIntervalDetector(double dark_threshold) : threshold_(dark_threshold) {
  if (!(dark_threshold > 0.0) || !std::isfinite(dark_threshold)) {
    throw InvalidArgument("dark_threshold must be positive");
  }
}

void DarkIntervalDetector::observe(double arrival_time) {
  const double gap = arrival_time - last_;
  if (gap > threshold_) found_.push_back({seen_any_ ? last_ + threshold_ : 0.0, arrival_time});
  last_ = arrival_time;
  seen_any_ = true;
}

std::vector<DarkInterval> DarkIntervalDetector::finish(double total_time) {
  if (total_time - last_ > threshold_) found_.push_back({seen_any_ ? last_ + threshold_ : 0.0, total_time});
  auto out = std::move(found_);
  found_.clear();
  last_ = 0.0;
  seen_any_ = false;
  return out;
}

std::vector<DarkInterval> detect_jumps(const PhotonRecord& record, double dark_threshold) {
  DarkIntervalDetector detector(dark_threshold);
  if (!(record.total_time > 0.0)) return {};
  for (double t : record.arrival_times) detector.observe(t);
  return detector.finish(record.total_time);
}

// ---------------------------------------------------------------------------

DetectorScore score_detections(const TelegraphTrajectory& truth, std::span<const DarkInterval> detected,
                               double dark_threshold) {
  std::vector<DarkInterval> dark;
  for (const auto& iv : truth.intervals) {
    if (iv.state == FluorescenceState::Dark) dark.push_back({iv.start, iv.start + iv.duration});
  }
  auto overlaps = [](const DarkInterval& a, const DarkInterval& b) { return a.start < b.end && b.start < a.end; };

  DetectorScore score;
  score.detections = detected.size();

  // Both lists are sorted and non-overlapping, so a merge sweep suffices.
  std::size_t j = 0;
  for (const auto& d : detected) {
    while (j < dark.size() && dark[j].end <= d.start) ++j;
    if (j >= dark.size() || !overlaps(d, dark[j])) ++score.false_detections;
  }

  std::size_t k = 0;
  for (const auto& t : dark) {
    if (t.end - t.start <= 2.0 * dark_threshold) continue;
    ++score.long_dark_intervals;
    while (k < detected.size() && detected[k].end <= t.start) ++k;
    if (k < detected.size() && overlaps(detected[k], t)) {
      ++score.recalled;
      const double latency = detected[k].start - t.start;
      score.max_latency = std::max(score.max_latency, latency);
      if (latency < 0.0 || latency > dark_threshold) ++score.latency_violations;
    }
  }
  score.recall = score.long_dark_intervals > 0
                     ? static_cast<double>(score.recalled) / static_cast<double>(score.long_dark_intervals)
                     : 1.0;
  score.false_discovery_rate =
      score.detections > 0 ? static_cast<double>(score.false_detections) / static_cast<double>(score.detections) : 0.0;
  return score;
}

}  // namespace whichpath
