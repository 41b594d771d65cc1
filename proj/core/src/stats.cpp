#include "whichpath/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "whichpath/error.hpp"

namespace whichpath {

// ---------------------------------------------------------------------------
// Sampling

InverseCdfSampler::InverseCdfSampler(const RealDensity& density)
    : nodes_(density.geometry().nodes()), cumulative_(nodes_.size(), 0.0) {
  if (std::abs(density.total() - 1.0) > 1e-9) throw InvalidArgument("sampling requires a unit-mass density");
  const auto v = density.values();
  const double dx = density.geometry().step();
  for (std::size_t i = 1; i < v.size(); ++i) cumulative_[i] = cumulative_[i - 1] + 0.5 * (v[i - 1] + v[i]) * dx;
  if (!(cumulative_.back() > 0.0)) throw InvalidArgument("sampling requires a nonzero density");
  const double total = cumulative_.back();
  for (auto& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

double InverseCdfSampler::draw(Rng& rng) const {
  const double u = rng.uniform();
  // First node whose cumulative mass exceeds u; cells of zero mass are skipped.
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto hi = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  const std::size_t i = std::clamp<std::size_t>(hi, 1, cumulative_.size() - 1) - 1;
  const double cell = cumulative_[i + 1] - cumulative_[i];
  const double t = cell > 0.0 ? std::clamp((u - cumulative_[i]) / cell, 0.0, 1.0) : 0.0;
  return nodes_[i] + t * (nodes_[i + 1] - nodes_[i]);
}

double InverseCdfSampler::cdf(double x) const {
  if (x <= nodes_.front()) return 0.0;
  if (x >= nodes_.back()) return 1.0;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const auto i = static_cast<std::size_t>(std::distance(nodes_.begin(), it)) - 1;
  const double t = (x - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
  return cumulative_[i] + t * (cumulative_[i + 1] - cumulative_[i]);
}

PositionSample sample_positions(const RealDensity& density, std::size_t n, Rng& rng,
                                const IlluminationConfig& source) {
  if (n == 0) throw InvalidArgument("sample_positions requires n >= 1");
  const InverseCdfSampler sampler(density);
  PositionSample out;
  out.positions.reserve(n);
  out.source_config = source;
  out.seed = rng.seed();
  for (std::size_t i = 0; i < n; ++i) out.positions.push_back(sampler.draw(rng));
  return out;
}

// ---------------------------------------------------------------------------
// Histogram

Histogram::Histogram(std::vector<double> bin_edges, std::vector<std::uint64_t> counts)
    : edges_(std::move(bin_edges)), counts_(std::move(counts)) {
  if (edges_.size() < 2 || edges_.size() != counts_.size() + 1) {
    throw InvalidArgument("histogram needs one more edge than bins");
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) throw InvalidArgument("histogram edges must be strictly increasing");
  }
  for (auto c : counts_) n_total_ += c;
}

Histogram Histogram::mirrored() const {
  std::vector<double> edges(edges_.size());
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = -edges_[edges_.size() - 1 - i];
  std::vector<std::uint64_t> counts(counts_.rbegin(), counts_.rend());
  return Histogram(std::move(edges), std::move(counts));
}

Histogram histogram(std::span<const double> positions, std::size_t n_bins, Window range) {
  if (n_bins == 0) throw InvalidArgument("histogram requires at least one bin");
  if (!(range.lo < range.hi)) throw InvalidArgument("histogram range must be nonempty");
  std::vector<double> edges(n_bins + 1);
  const double width = range.width() / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) edges[i] = range.lo + width * static_cast<double>(i);
  edges.back() = range.hi;

  std::vector<std::uint64_t> counts(n_bins, 0);
  for (double x : positions) {
    if (!(x >= range.lo && x <= range.hi)) throw InvalidArgument("histogram: position outside the binning range");
    auto bin = static_cast<std::size_t>((x - range.lo) / width);
    bin = std::min(bin, n_bins - 1);
    // Guard against rounding at interior edges.
    if (bin > 0 && x < edges[bin]) --bin;
    if (bin + 1 < n_bins && x >= edges[bin + 1]) ++bin;
    ++counts[bin];
  }
  return Histogram(std::move(edges), std::move(counts));
}

// ---------------------------------------------------------------------------
// Chi-square

double chi_square_survival(double statistic, std::size_t dof) {
  if (dof == 0) throw InvalidArgument("chi-square needs at least one degree of freedom");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * static_cast<double>(dof), 0.5 * statistic);
}

namespace {

struct MergedBin {
  double observed = 0.0;
  double expected = 0.0;
};

std::vector<MergedBin> merge_edges_inward(const std::vector<double>& observed, const std::vector<double>& expected) {
  std::vector<MergedBin> left, right;
  std::size_t lo = 0;
  std::size_t hi = observed.size();  // exclusive
  MergedBin acc_left, acc_right;
  bool take_left = true;
  while (lo < hi) {
    if (take_left) {
      acc_left.observed += observed[lo];
      acc_left.expected += expected[lo];
      ++lo;
      if (acc_left.expected >= kMinExpectedCount) {
        left.push_back(acc_left);
        acc_left = {};
        take_left = false;
      }
    } else {
      --hi;
      acc_right.observed += observed[hi];
      acc_right.expected += expected[hi];
      if (acc_right.expected >= kMinExpectedCount) {
        right.push_back(acc_right);
        acc_right = {};
        take_left = true;
      }
    }
  }
  // Leftover partial runs meet in the middle; join them and fold into a
  // neighbor if still short.
  MergedBin middle{acc_left.observed + acc_right.observed, acc_left.expected + acc_right.expected};
  std::vector<MergedBin> out = std::move(left);
  if (middle.expected > 0.0 || middle.observed > 0.0) {
    if (middle.expected >= kMinExpectedCount) {
      out.push_back(middle);
    } else if (!out.empty()) {
      out.back().observed += middle.observed;
      out.back().expected += middle.expected;
    } else if (!right.empty()) {
      right.back().observed += middle.observed;
      right.back().expected += middle.expected;
    } else {
      out.push_back(middle);
    }
  }
  out.insert(out.end(), right.rbegin(), right.rend());
  return out;
}

}  // namespace

ChiSquareResult chi_square_gof(const Histogram& h, const RealDensity& expected) {
  const InverseCdfSampler cdf(expected.normalized());
  const Window range = h.range();
  const double scale = expected.total();
  const double mass_in_range = scale * cdf.mass(range.lo, range.hi);
  if (std::abs(mass_in_range - 1.0) > 1e-6) {
    throw InvalidArgument("chi_square_gof: expected density is not normalized over the histogram range");
  }
  if (h.n_total() == 0) throw InvalidArgument("chi_square_gof: empty histogram");

  const auto n = static_cast<double>(h.n_total());
  std::vector<double> observed(h.bins()), expected_counts(h.bins());
  for (std::size_t i = 0; i < h.bins(); ++i) {
    observed[i] = static_cast<double>(h.counts()[i]);
    expected_counts[i] = n * scale * cdf.mass(h.bin_edges()[i], h.bin_edges()[i + 1]);
  }
  const auto merged = merge_edges_inward(observed, expected_counts);
  if (merged.size() < 2) throw InvalidArgument("chi_square_gof: fewer than two bins after merging");

  ChiSquareResult out;
  for (const auto& b : merged) {
    if (b.expected <= 0.0) {
      out.statistic = std::numeric_limits<double>::infinity();
      break;
    }
    const double d = b.observed - b.expected;
    out.statistic += d * d / b.expected;
  }
  out.merged_bins = merged.size();
  out.dof = merged.size() - 1;
  out.p_value = std::isfinite(out.statistic) ? chi_square_survival(out.statistic, out.dof) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) {
    // Alternating series converges slowly here; the tail is 1 to double precision.
    return 1.0;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_exponential(std::span<const double> durations, double rate) {
  if (durations.size() < 10) throw InvalidArgument("ks_exponential requires at least 10 durations");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("ks_exponential requires a positive rate");
  std::vector<double> sorted(durations.begin(), durations.end());
  for (double d : sorted) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("ks_exponential: durations must be positive");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d_max = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = -std::expm1(-rate * sorted[i]);
    const double above = (static_cast<double>(i) + 1.0) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d_max = std::max({d_max, above, below});
  }
  return {d_max, kolmogorov_survival(std::sqrt(n) * d_max)};
}

// ---------------------------------------------------------------------------

double sampled_visibility(std::span<const double> positions, Window window, double period) {
  if (!(period > 0.0)) throw InvalidArgument("sampled_visibility requires a positive period");
  if (window.width() < 2.0 * period * (1.0 - 1e-9)) {
    throw InvalidArgument("sampled_visibility: window narrower than two fringe periods");
  }
  const double k = 2.0 * std::numbers::pi / period;
  std::complex<double> sum = 0.0;
  std::size_t n = 0;
  for (double x : positions) {
    if (x < window.lo || x > window.hi) continue;
    sum += std::polar(1.0, k * x);
    ++n;
  }
  if (n == 0) throw InvalidArgument("sampled_visibility: no positions inside the window");
  return std::min(1.0, 2.0 * std::abs(sum) / static_cast<double>(n));
}

double max_two_sample_z(const Histogram& a, const Histogram& b) {
  if (a.bins() != b.bins()) throw InvalidArgument("max_two_sample_z: histograms differ in bin count");
  for (std::size_t i = 0; i <= a.bins(); ++i) {
    const double tol = 1e-9 * a.range().width();
    if (std::abs(a.bin_edges()[i] - b.bin_edges()[i]) > tol) {
      throw InvalidArgument("max_two_sample_z: histograms use different bin edges");
    }
  }
  const auto na = static_cast<double>(a.n_total());
  const auto nb = static_cast<double>(b.n_total());
  if (na == 0 || nb == 0) throw InvalidArgument("max_two_sample_z: empty histogram");
  double z_max = 0.0;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    const auto ca = static_cast<double>(a.counts()[i]);
    const auto cb = static_cast<double>(b.counts()[i]);
    const double pooled = (ca + cb) / (na + nb);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
    if (se == 0.0) continue;
    z_max = std::max(z_max, std::abs(ca / na - cb / nb) / se);
  }
  return z_max;
}

}  // namespace whichpath
