#include "whichpath/measurement.hpp"

#include <cmath>

#include "whichpath/error.hpp"

namespace whichpath {

std::string_view to_string(IlluminationMode mode) {
  switch (mode) {
    case IlluminationMode::Off: return "off";
    case IlluminationMode::BothHoles: return "both_holes";
    case IlluminationMode::HoleAOnly: return "hole_a_only";
  }
  return "unknown";
}

std::string_view to_string(OutcomeTag tag) {
  switch (tag) {
    case OutcomeTag::SeenAtA: return "seen_at_a";
    case OutcomeTag::SeenAtB: return "seen_at_b";
    case OutcomeTag::NotSeen: return "not_seen";
  }
  return "unknown";
}

IlluminationConfig IlluminationConfig::normalized() const {
  IlluminationConfig out = *this;
  if (out.mode == IlluminationMode::Off) out.window_complete = false;
  return out;
}

void IlluminationConfig::validate() const {
  if (!(detection_efficiency >= 0.0 && detection_efficiency <= 1.0)) {
    throw InvalidArgument("detection_efficiency must lie in [0, 1]");
  }
}

// ---------------------------------------------------------------------------

namespace {

RealDensity sum_densities(const RealDensity& a, const RealDensity& b) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
  return RealDensity(a.geometry(), std::move(out));
}

/// Unseen-at-A amplitude for an imperfect detector at hole A: the A branch
/// survives with amplitude sqrt(1 - eta). Normalized.
TransverseAmplitude partial_null_amplitude(const TwoHoleSetup& setup, double efficiency) {
  return superpose(setup.hole(Hole::A).scaled(std::sqrt(1.0 - efficiency)), setup.hole(Hole::B)).normalized();
}

}  // namespace

TwoHoleSetup::TwoHoleSetup(const SlitGeometry& geometry)
    : geometry_(geometry),
      psi_a_(single_hole_amplitude(geometry, Hole::A)),
      psi_b_(single_hole_amplitude(geometry, Hole::B)),
      psi_sum_(superpose(psi_a_, psi_b_)),
      psi_a_unit_(psi_a_.normalized()),
      psi_b_unit_(psi_b_.normalized()),
      density_a_(intensity(psi_a_).normalized()),
      density_b_(intensity(psi_b_).normalized()),
      density_sum_(intensity(psi_sum_).normalized()),
      density_mixture_(sum_densities(intensity(psi_a_), intensity(psi_b_))) {}

std::shared_ptr<const TwoHoleSetup> TwoHoleSetup::prepare(const SlitGeometry& geometry) {
  return std::shared_ptr<const TwoHoleSetup>(new TwoHoleSetup(geometry));
}

// ---------------------------------------------------------------------------

ConditionalState::ConditionalState(std::shared_ptr<const TwoHoleSetup> setup, std::vector<Branch> branches,
                                   bool coherent)
    : setup_(std::move(setup)), branches_(std::move(branches)), coherent_(coherent) {
  if (!setup_) throw InvalidArgument("conditional state requires a two-hole setup");
  if (branches_.empty()) throw InvalidArgument("conditional state requires at least one branch");
  if (coherent_ && branches_.size() != 1) throw InvalidArgument("a coherent state must hold exactly one branch");
  double total = 0.0;
  for (const auto& b : branches_) {
    if (!(b.classical_weight >= 0.0)) throw InvalidArgument("negative classical branch weight");
    total += b.classical_weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("classical branch weights must sum to one");
}

ConditionalState ConditionalState::coherent_superposition(std::shared_ptr<const TwoHoleSetup> setup) {
  if (!setup) throw InvalidArgument("conditional state requires a two-hole setup");
  TransverseAmplitude psi = setup->superposition();
  return ConditionalState(std::move(setup), {Branch{std::move(psi), 1.0}}, true);
}

ConditionalState ConditionalState::pure(std::shared_ptr<const TwoHoleSetup> setup, TransverseAmplitude amplitude,
                                        bool coherent) {
  return ConditionalState(std::move(setup), {Branch{std::move(amplitude), 1.0}}, coherent);
}

RealDensity ConditionalState::density() const {
  const auto& geometry = setup_->geometry();
  std::vector<double> out(geometry.size(), 0.0);
  for (const auto& branch : branches_) {
    const auto& psi = branch.amplitude;
    if (!(psi.weight() > 0.0)) throw NumericalError("branch amplitude has zero weight");
    const double scale = branch.classical_weight / psi.weight();
    const auto v = psi.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * std::norm(v[i]);
  }
  return RealDensity(geometry, std::move(out)).normalized();
}

// ---------------------------------------------------------------------------

OutcomeProbabilities outcome_probabilities(const TwoHoleSetup& setup, const IlluminationConfig& config) {
  const IlluminationConfig c = config.normalized();
  c.validate();
  if (!c.observing()) return {0.0, 0.0, 1.0};

  const double eta = c.detection_efficiency;
  const double total = setup.branch_weight(Hole::A) + setup.branch_weight(Hole::B);
  const double wa = setup.branch_weight(Hole::A) / total;
  const double wb = setup.branch_weight(Hole::B) / total;
  if (c.mode == IlluminationMode::BothHoles) {
    return {eta * wa, eta * wb, eta == 1.0 ? 0.0 : 1.0 - eta};
  }
  return {eta * wa, 0.0, 1.0 - eta * wa};
}

void check_consistent(const IlluminationConfig& config, const MeasurementOutcome& outcome) {
  const IlluminationConfig c = config.normalized();
  c.validate();
  if (outcome.window_complete_at_decision != c.window_complete) {
    throw InvalidArgument("outcome window flag does not match the illumination config");
  }
  if (outcome.tag != OutcomeTag::NotSeen && !c.observing()) {
    throw InvalidArgument("a detection outcome is impossible while the hole is not observed");
  }
  if (outcome.tag == OutcomeTag::SeenAtB && c.mode == IlluminationMode::HoleAOnly) {
    throw InvalidArgument("seen_at_b is impossible when only hole A is illuminated");
  }
}

MeasurementResult apply_measurement(const ConditionalState& initial, const IlluminationConfig& config, Rng& rng) {
  const auto& setup = initial.setup();
  if (!initial.coherent() || initial.branches().front().amplitude.storage_id() !=
                                 setup->superposition().storage_id()) {
    throw InvalidArgument("apply_measurement expects the coherent two-hole superposition");
  }
  const IlluminationConfig c = config.normalized();
  const OutcomeProbabilities p = outcome_probabilities(*setup, c);

  const double u = rng.uniform();
  OutcomeTag tag = OutcomeTag::NotSeen;
  if (u < p[0]) {
    tag = OutcomeTag::SeenAtA;
  } else if (u < p[0] + p[1]) {
    tag = OutcomeTag::SeenAtB;
  }
  const MeasurementOutcome outcome{tag, c.window_complete};

  switch (tag) {
    case OutcomeTag::SeenAtA:
      return {outcome, ConditionalState::pure(setup, setup->collapsed(Hole::A), false)};
    case OutcomeTag::SeenAtB:
      return {outcome, ConditionalState::pure(setup, setup->collapsed(Hole::B), false)};
    case OutcomeTag::NotSeen:
      break;
  }
  // A miss under symmetric illumination, or no observation at all, carries
  // no which-path information.
  if (!c.observing() || c.mode == IlluminationMode::BothHoles) return {outcome, initial};
  // Negative observation at A.
  if (c.detection_efficiency == 1.0) {
    return {outcome, ConditionalState::pure(setup, setup->collapsed(Hole::B), false)};
  }
  return {outcome, ConditionalState::pure(setup, partial_null_amplitude(*setup, c.detection_efficiency), true)};
}

RealDensity ensemble_density(const TwoHoleSetup& setup, const IlluminationConfig& config) {
  const IlluminationConfig c = config.normalized();
  c.validate();
  if (c.detection_efficiency != 1.0) {
    throw InvalidArgument("ensemble_density supports only unit detection efficiency");
  }
  return c.observing() ? setup.which_path_density() : setup.interference_density();
}

RealDensity conditional_density(const TwoHoleSetup& setup, const IlluminationConfig& config,
                                const MeasurementOutcome& outcome) {
  check_consistent(config, outcome);
  const IlluminationConfig c = config.normalized();
  const OutcomeProbabilities p = outcome_probabilities(setup, c);
  if (!(p[static_cast<std::size_t>(outcome.tag)] > 0.0)) {
    throw InvalidArgument("outcome has zero probability under this illumination config");
  }
  switch (outcome.tag) {
    case OutcomeTag::SeenAtA: return setup.single_hole_density(Hole::A);
    case OutcomeTag::SeenAtB: return setup.single_hole_density(Hole::B);
    case OutcomeTag::NotSeen: break;
  }
  if (!c.observing() || c.mode == IlluminationMode::BothHoles) return setup.interference_density();
  if (c.detection_efficiency == 1.0) return setup.single_hole_density(Hole::B);
  return intensity(partial_null_amplitude(setup, c.detection_efficiency)).normalized();
}

}  // namespace whichpath
