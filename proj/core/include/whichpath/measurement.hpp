#pragma once

// Which-path illumination at the wall and the resulting collapse of the
// two-hole superposition, including collapse on a null (negative) result.

#include <array>
#include <memory>
#include <string_view>
#include <vector>

#include "whichpath/optics.hpp"
#include "whichpath/random.hpp"

namespace whichpath {

enum class IlluminationMode { Off, BothHoles, HoleAOnly };

struct IlluminationConfig {
  IlluminationMode mode = IlluminationMode::Off;
  /// Whether the full observation window elapsed before the light went off.
  bool window_complete = true;
  /// Probability that an illuminated electron is seen.
  double detection_efficiency = 1.0;

  /// Copy with window_complete forced to false when the light is off.
  IlluminationConfig normalized() const;
  /// Throws InvalidArgument for an efficiency outside [0, 1].
  void validate() const;
  /// True when a detection at a hole can actually happen.
  bool observing() const { return mode != IlluminationMode::Off && window_complete; }
};

enum class OutcomeTag { SeenAtA, SeenAtB, NotSeen };

struct MeasurementOutcome {
  OutcomeTag tag = OutcomeTag::NotSeen;
  bool window_complete_at_decision = false;
};

std::string_view to_string(IlluminationMode mode);
std::string_view to_string(OutcomeTag tag);

/// The single-hole amplitudes, their superposition, and the renormalized
/// collapse targets for one geometry. Built once and shared by every state.
class TwoHoleSetup {
 public:
  static std::shared_ptr<const TwoHoleSetup> prepare(const SlitGeometry& geometry);

  const SlitGeometry& geometry() const { return geometry_; }
  const TransverseAmplitude& hole(Hole h) const { return h == Hole::A ? psi_a_ : psi_b_; }
  const TransverseAmplitude& collapsed(Hole h) const { return h == Hole::A ? psi_a_unit_ : psi_b_unit_; }
  const TransverseAmplitude& superposition() const { return psi_sum_; }
  /// Branch weight of hole h (w_h / (w_A + w_B)).
  double branch_weight(Hole h) const { return hole(h).weight(); }

  /// Normalized |psi_A|^2 / w_A or |psi_B|^2 / w_B.
  const RealDensity& single_hole_density(Hole h) const { return h == Hole::A ? density_a_ : density_b_; }
  /// Normalized |psi_A + psi_B|^2.
  const RealDensity& interference_density() const { return density_sum_; }
  /// P_A + P_B.
  const RealDensity& which_path_density() const { return density_mixture_; }

 private:
  explicit TwoHoleSetup(const SlitGeometry& geometry);

  SlitGeometry geometry_;
  TransverseAmplitude psi_a_, psi_b_, psi_sum_, psi_a_unit_, psi_b_unit_;
  RealDensity density_a_, density_b_, density_sum_, density_mixture_;
};

struct Branch {
  TransverseAmplitude amplitude;
  double classical_weight = 1.0;
};

/// Pre- or post-measurement state: a classical mixture of pure branches.
class ConditionalState {
 public:
  /// The coherent two-hole superposition, the starting point of every trial.
  static ConditionalState coherent_superposition(std::shared_ptr<const TwoHoleSetup> setup);
  /// A single pure branch; `coherent` marks a superposed (interfering) amplitude.
  static ConditionalState pure(std::shared_ptr<const TwoHoleSetup> setup, TransverseAmplitude amplitude, bool coherent);

  const std::vector<Branch>& branches() const { return branches_; }
  bool coherent() const { return coherent_; }
  const std::shared_ptr<const TwoHoleSetup>& setup() const { return setup_; }

  /// sum_k weight_k |psi_k|^2 / ||psi_k||^2, normalized to unit total.
  RealDensity density() const;

 private:
  ConditionalState(std::shared_ptr<const TwoHoleSetup> setup, std::vector<Branch> branches, bool coherent);

  std::shared_ptr<const TwoHoleSetup> setup_;
  std::vector<Branch> branches_;
  bool coherent_ = false;
};

struct MeasurementResult {
  MeasurementOutcome outcome;
  ConditionalState state;
};

/// Outcome probabilities indexed by OutcomeTag.
using OutcomeProbabilities = std::array<double, 3>;

OutcomeProbabilities outcome_probabilities(const TwoHoleSetup& setup, const IlluminationConfig& config);

/// Samples an outcome with one uniform draw partitioned in the order
/// SeenAtA, SeenAtB, NotSeen, and returns the post-measurement state.
MeasurementResult apply_measurement(const ConditionalState& initial, const IlluminationConfig& config, Rng& rng);

/// Backstop density marginalized over outcomes. Requires unit efficiency.
RealDensity ensemble_density(const TwoHoleSetup& setup, const IlluminationConfig& config);

/// Normalized backstop density of the branch selected by `outcome`.
RealDensity conditional_density(const TwoHoleSetup& setup, const IlluminationConfig& config,
                                const MeasurementOutcome& outcome);

/// Throws InvalidArgument when `outcome` cannot occur under `config`.
void check_consistent(const IlluminationConfig& config, const MeasurementOutcome& outcome);

}  // namespace whichpath
