#pragma once

// Born-rule sampling of backstop positions and the goodness-of-fit tests used
// to compare sampled electrons and dwell times against analytic laws.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "whichpath/measurement.hpp"
#include "whichpath/optics.hpp"
#include "whichpath/random.hpp"

namespace whichpath {

struct PositionSample {
  std::vector<double> positions;
  IlluminationConfig source_config;
  std::uint64_t seed = 0;
};

/// Inverse-CDF sampler for a gridded density. The CDF is the cumulative
/// trapezoid sum at the nodes, interpolated linearly in between, so draws are
/// continuous positions.
class InverseCdfSampler {
 public:
  /// Requires total() == 1 within 1e-9.
  explicit InverseCdfSampler(const RealDensity& density);

  double draw(Rng& rng) const;
  /// Mass below x under the interpolated CDF.
  double cdf(double x) const;
  /// Mass in [lo, hi].
  double mass(double lo, double hi) const { return cdf(hi) - cdf(lo); }

 private:
  std::vector<double> nodes_;
  std::vector<double> cumulative_;
};

PositionSample sample_positions(const RealDensity& density, std::size_t n, Rng& rng,
                                const IlluminationConfig& source = {});

class Histogram {
 public:
  Histogram(std::vector<double> bin_edges, std::vector<std::uint64_t> counts);

  const std::vector<double>& bin_edges() const { return edges_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::size_t bins() const { return counts_.size(); }
  std::uint64_t n_total() const { return n_total_; }
  Window range() const { return {edges_.front(), edges_.back()}; }

  /// Bins reversed; the mirror image for a range symmetric about zero.
  Histogram mirrored() const;

 private:
  std::vector<double> edges_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_total_ = 0;
};

/// Equal-width bins over `range`; the last bin includes its upper edge.
/// Throws InvalidArgument if any position lies outside the range.
Histogram histogram(std::span<const double> positions, std::size_t n_bins, Window range);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t merged_bins = 0;
};

/// Minimum expected count in a merged bin.
inline constexpr double kMinExpectedCount = 5.0;

/// Pearson goodness of fit against bin masses integrated from `expected`.
/// Adjacent bins are merged from both edges inward until every merged bin
/// expects at least kMinExpectedCount. The density must carry unit mass over
/// the histogram range.
ChiSquareResult chi_square_gof(const Histogram& h, const RealDensity& expected);

/// Upper tail of the chi-square distribution.
double chi_square_survival(double statistic, std::size_t dof);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov distribution tail, P(K > lambda).
double kolmogorov_survival(double lambda);

/// One-sample Kolmogorov-Smirnov test against Exponential(rate).
KsResult ks_exponential(std::span<const double> durations, double rate);

/// Fringe visibility estimated from individual positions: twice the modulus
/// of the mean of exp(i 2 pi x / period) over positions inside `window`,
/// which should span a whole number of periods.
double sampled_visibility(std::span<const double> positions, Window window, double period);

/// Largest per-bin two-sample z-score between histograms on the same bins,
/// using the pooled binomial proportion.
double max_two_sample_z(const Histogram& a, const Histogram& b);

}  // namespace whichpath
