#pragma once

// Far-field two-hole diffraction on a one-dimensional backstop grid.
//
// Hole A sits at x = -s/2 and hole B at x = +s/2 in the wall plane. Screen
// amplitudes use the paraxial Fraunhofer form: every hole contributes a sinc
// envelope centered on the optical axis multiplied by a linear phase ramp
// exp(i 2 pi x x_h / (lambda L)). A brute-force Fresnel quadrature with the
// same sign convention is provided as an independent cross-check.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace whichpath {

enum class Hole { A, B };

/// Physical parameters in SI units (meters).
struct SlitParameters {
  double hole_separation = 5e-6;
  double hole_width_a = 0.5e-6;
  double hole_width_b = 0.5e-6;
  double wall_to_backstop = 1.0;
  double de_broglie_wavelength = 50e-9;
  double grid_min = -0.2;
  double grid_max = 0.2;
  std::size_t grid_points = 8192;
};

/// Closed interval [lo, hi] on the backstop.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Largest Fresnel number w^2/(lambda L) accepted by the far-field model.
inline constexpr double kMaxFresnelNumber = 0.1;

class SlitGeometry {
 public:
  enum class Regime { FarField, Any };

  /// Validates the parameters. With Regime::FarField (the default) geometries
  /// whose holes violate w^2/(lambda L) <= kMaxFresnelNumber are rejected.
  static SlitGeometry create(const SlitParameters& params, Regime regime = Regime::FarField);

  /// lambda = 50 nm, w = 0.5 um, s = 5 um, L = 1 m, grid [-0.2 m, 0.2 m], 8192 points.
  static SlitGeometry default_geometry();

  const SlitParameters& parameters() const { return params_; }

  double hole_center(Hole hole) const;
  double hole_width(Hole hole) const;
  double fresnel_number(Hole hole) const;
  bool far_field_valid() const;

  /// lambda L / s.
  double fringe_period() const;
  /// lambda L.
  double wavelength_distance() const;

  std::size_t size() const { return params_.grid_points; }
  double step() const { return (params_.grid_max - params_.grid_min) / static_cast<double>(size() - 1); }
  /// Grid node i. Nodes of a grid symmetric about zero are exact mirror images.
  double x(std::size_t i) const;
  std::vector<double> nodes() const;
  Window extent() const { return {params_.grid_min, params_.grid_max}; }

  /// True when both geometries sample the backstop on the same nodes.
  bool same_grid(const SlitGeometry& other) const;

 private:
  explicit SlitGeometry(const SlitParameters& params) : params_(params) {}
  SlitParameters params_;
};

/// Complex amplitude sampled on the backstop grid. Immutable; copies share storage.
class TransverseAmplitude {
 public:
  TransverseAmplitude(SlitGeometry geometry, std::vector<std::complex<double>> values);
  static TransverseAmplitude zeros(const SlitGeometry& geometry);

  const SlitGeometry& geometry() const { return geometry_; }
  std::span<const std::complex<double>> values() const { return *values_; }
  /// Trapezoid integral of |psi|^2 over the grid.
  double weight() const { return weight_; }

  TransverseAmplitude scaled(std::complex<double> factor) const;
  /// Rescaled to unit weight. Throws NumericalError for a zero amplitude.
  TransverseAmplitude normalized() const;

  /// Identity of the shared sample storage.
  const void* storage_id() const { return values_.get(); }

 private:
  SlitGeometry geometry_;
  std::shared_ptr<const std::vector<std::complex<double>>> values_;
  double weight_;
};

/// Nonnegative density sampled on the backstop grid. Immutable; copies share storage.
class RealDensity {
 public:
  RealDensity(SlitGeometry geometry, std::vector<double> values);

  const SlitGeometry& geometry() const { return geometry_; }
  std::span<const double> values() const { return *values_; }
  /// Trapezoid integral over the grid.
  double total() const { return total_; }

  RealDensity scaled(double factor) const;
  RealDensity normalized() const;

  /// Linear interpolation between nodes; zero outside the grid.
  double at(double x) const;

 private:
  SlitGeometry geometry_;
  std::shared_ptr<const std::vector<double>> values_;
  double total_;
};

/// Trapezoid rule on a uniform grid with spacing `dx`.
double trapezoid(std::span<const double> values, double dx);

/// Far-field amplitude of one hole, normalized so the branch weight on the
/// grid equals w_h / (w_A + w_B).
TransverseAmplitude single_hole_amplitude(const SlitGeometry& geometry, Hole hole);

/// Unnormalized closed-form amplitude of `hole` evaluated at an arbitrary x.
std::complex<double> far_field_profile(const SlitGeometry& geometry, Hole hole, double x);

/// Pointwise sum. The weight is re-integrated, so it includes the cross term.
TransverseAmplitude superpose(const TransverseAmplitude& a, const TransverseAmplitude& b);

/// |psi|^2 on the grid.
RealDensity intensity(const TransverseAmplitude& psi);

struct QuadratureOptions {
  /// Trapezoid panels per hole.
  std::size_t panels = 10000;
  /// Accepted relative L2 change between `panels` and `panels / 2`.
  double convergence_tolerance = 1e-6;
};

/// Brute-force Fresnel integral over the open holes, with the aperture
/// uniformly illuminated at unit total flux. The observation-plane phase
/// exp(-i pi x^2 / (lambda L)), common to every aperture point, is factored
/// out so the result is directly comparable with the far-field amplitudes.
/// Does not require the far-field condition. Throws NumericalError when the
/// quadrature has not converged.
TransverseAmplitude fresnel_oracle(const SlitGeometry& geometry, std::span<const Hole> open_holes,
                                   const QuadratureOptions& options = {});

/// min over complex c of ||c * reference - candidate|| / ||candidate||. Global
/// phase and scale are unobservable in a density, so they are fitted out.
double aligned_relative_l2_error(const TransverseAmplitude& reference, const TransverseAmplitude& candidate);

/// Window centered on the axis spanning `periods` fringe periods.
Window central_window(const SlitGeometry& geometry, double periods = 2.0);

/// (P_max - P_min) / (P_max + P_min) over the grid nodes inside `window`.
/// The window must lie inside the grid and span at least two fringe periods.
double visibility(const RealDensity& density, Window window);

}  // namespace whichpath
