#include "whichpath/optics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "whichpath/error.hpp"

namespace whichpath {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; }

double weighted_norm_squared(std::span<const std::complex<double>> v, double dx) {
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [](std::complex<double> z) { return std::norm(z); });
  return trapezoid(sq, dx);
}

std::string describe(const char* name, double value) {
  std::ostringstream os;
  os << name << " = " << value;
  return os.str();
}

}  // namespace

double trapezoid(std::span<const double> values, double dx) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * dx;
}

// ---------------------------------------------------------------------------
// SlitGeometry

SlitGeometry SlitGeometry::create(const SlitParameters& p, Regime regime) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("invalid slit geometry: " + what);
  };
  auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(finite_positive(p.hole_separation), describe("hole_separation", p.hole_separation));
  require(finite_positive(p.hole_width_a), describe("hole_width_a", p.hole_width_a));
  require(finite_positive(p.hole_width_b), describe("hole_width_b", p.hole_width_b));
  require(finite_positive(p.wall_to_backstop), describe("wall_to_backstop", p.wall_to_backstop));
  require(finite_positive(p.de_broglie_wavelength), describe("de_broglie_wavelength", p.de_broglie_wavelength));
  require(p.grid_points >= 2, "grid_points must be at least 2");
  require(std::isfinite(p.grid_min) && std::isfinite(p.grid_max) && p.grid_min < p.grid_max,
          "grid_min must be below grid_max");

  SlitGeometry geometry(p);
  require(p.grid_max - p.grid_min >= 6.0 * geometry.fringe_period(),
          "grid must span at least three fringe periods on each side (6 lambda L / s)");
  if (regime == Regime::FarField) {
    require(geometry.far_field_valid(),
            describe("far-field condition w^2/(lambda L) <= 0.1 violated, max Fresnel number",
                     std::max(geometry.fresnel_number(Hole::A), geometry.fresnel_number(Hole::B))));
  }
  return geometry;
}

SlitGeometry SlitGeometry::default_geometry() { return create(SlitParameters{}); }

double SlitGeometry::hole_center(Hole hole) const {
  return hole == Hole::A ? -0.5 * params_.hole_separation : 0.5 * params_.hole_separation;
}

double SlitGeometry::hole_width(Hole hole) const {
  return hole == Hole::A ? params_.hole_width_a : params_.hole_width_b;
}

double SlitGeometry::fresnel_number(Hole hole) const {
  const double w = hole_width(hole);
  return w * w / wavelength_distance();
}

bool SlitGeometry::far_field_valid() const {
  return fresnel_number(Hole::A) <= kMaxFresnelNumber && fresnel_number(Hole::B) <= kMaxFresnelNumber;
}

double SlitGeometry::wavelength_distance() const { return params_.de_broglie_wavelength * params_.wall_to_backstop; }

double SlitGeometry::fringe_period() const { return wavelength_distance() / params_.hole_separation; }

double SlitGeometry::x(std::size_t i) const {
  const double center = 0.5 * (params_.grid_min + params_.grid_max);
  const double half = 0.5 * (params_.grid_max - params_.grid_min);
  const double last = static_cast<double>(size() - 1);
  const double k = 2.0 * static_cast<double>(i) - last;
  return center + half * k / last;
}

std::vector<double> SlitGeometry::nodes() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x(i);
  return out;
}

bool SlitGeometry::same_grid(const SlitGeometry& other) const {
  return params_.grid_min == other.params_.grid_min && params_.grid_max == other.params_.grid_max &&
         params_.grid_points == other.params_.grid_points;
}

// ---------------------------------------------------------------------------
// TransverseAmplitude / RealDensity

TransverseAmplitude::TransverseAmplitude(SlitGeometry geometry, std::vector<std::complex<double>> values)
    : geometry_(std::move(geometry)) {
  if (values.size() != geometry_.size()) throw InvalidArgument("amplitude size does not match the geometry grid");
  for (const auto& z : values) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NumericalError("non-finite amplitude value");
  }
  weight_ = weighted_norm_squared(values, geometry_.step());
  values_ = std::make_shared<const std::vector<std::complex<double>>>(std::move(values));
}

TransverseAmplitude TransverseAmplitude::zeros(const SlitGeometry& geometry) {
  return TransverseAmplitude(geometry, std::vector<std::complex<double>>(geometry.size()));
}

TransverseAmplitude TransverseAmplitude::scaled(std::complex<double> factor) const {
  std::vector<std::complex<double>> out(values_->begin(), values_->end());
  for (auto& z : out) z *= factor;
  return TransverseAmplitude(geometry_, std::move(out));
}

TransverseAmplitude TransverseAmplitude::normalized() const {
  if (!(weight_ > 0.0)) throw NumericalError("cannot normalize a zero amplitude");
  return scaled(1.0 / std::sqrt(weight_));
}

RealDensity::RealDensity(SlitGeometry geometry, std::vector<double> values) : geometry_(std::move(geometry)) {
  if (values.size() != geometry_.size()) throw InvalidArgument("density size does not match the geometry grid");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("density values must be finite and nonnegative");
  }
  total_ = trapezoid(values, geometry_.step());
  values_ = std::make_shared<const std::vector<double>>(std::move(values));
}

RealDensity RealDensity::scaled(double factor) const {
  std::vector<double> out(values_->begin(), values_->end());
  for (auto& v : out) v *= factor;
  return RealDensity(geometry_, std::move(out));
}

RealDensity RealDensity::normalized() const {
  if (!(total_ > 0.0)) throw NumericalError("cannot normalize a zero density");
  return scaled(1.0 / total_);
}

double RealDensity::at(double x) const {
  const auto& p = geometry_.parameters();
  if (x < p.grid_min || x > p.grid_max) return 0.0;
  const double pos = (x - p.grid_min) / geometry_.step();
  const auto i = std::min(static_cast<std::size_t>(pos), geometry_.size() - 2);
  const double t = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  return (1.0 - t) * (*values_)[i] + t * (*values_)[i + 1];
}

// ---------------------------------------------------------------------------
// Closed forms

std::complex<double> far_field_profile(const SlitGeometry& geometry, Hole hole, double x) {
  const double ll = geometry.wavelength_distance();
  const double envelope = sinc(kPi * geometry.hole_width(hole) * x / ll);
  return std::polar(envelope, 2.0 * kPi * x * geometry.hole_center(hole) / ll);
}

TransverseAmplitude single_hole_amplitude(const SlitGeometry& geometry, Hole hole) {
  if (!geometry.far_field_valid()) {
    throw InvalidArgument("far-field amplitude requested for a geometry violating w^2/(lambda L) <= 0.1");
  }
  std::vector<std::complex<double>> values(geometry.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = far_field_profile(geometry, hole, geometry.x(i));

  const auto& p = geometry.parameters();
  const double target = geometry.hole_width(hole) / (p.hole_width_a + p.hole_width_b);
  const double raw = weighted_norm_squared(values, geometry.step());
  if (!(raw > 0.0)) throw NumericalError("single-hole envelope vanishes on the grid");
  const double scale = std::sqrt(target / raw);
  for (auto& z : values) z *= scale;
  return TransverseAmplitude(geometry, std::move(values));
}

TransverseAmplitude superpose(const TransverseAmplitude& a, const TransverseAmplitude& b) {
  if (!a.geometry().same_grid(b.geometry())) throw InvalidArgument("superpose: amplitudes live on different grids");
  std::vector<std::complex<double>> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return TransverseAmplitude(a.geometry(), std::move(out));
}

RealDensity intensity(const TransverseAmplitude& psi) {
  std::vector<double> out(psi.values().size());
  std::transform(psi.values().begin(), psi.values().end(), out.begin(),
                 [](std::complex<double> z) { return std::norm(z); });
  return RealDensity(psi.geometry(), std::move(out));
}

// ---------------------------------------------------------------------------
// Fresnel quadrature

namespace {

void accumulate_hole(const SlitGeometry& geometry, Hole hole, std::size_t panels, double amplitude,
                     std::vector<std::complex<double>>& acc) {
  constexpr std::size_t kReseed = 128;
  const double ll = geometry.wavelength_distance();
  const double kappa = 2.0 * kPi / ll;
  const double lo = geometry.hole_center(hole) - 0.5 * geometry.hole_width(hole);
  const double h = geometry.hole_width(hole) / static_cast<double>(panels);
  const double dx = geometry.step();
  const std::size_t n = geometry.size();

  for (std::size_t j = 0; j <= panels; ++j) {
    const double xi = lo + h * static_cast<double>(j);
    const double w = (j == 0 || j == panels) ? 0.5 * h : h;
    const std::complex<double> c = std::polar(w * amplitude, -kPi * xi * xi / ll);
    const std::complex<double> step = std::polar(1.0, kappa * dx * xi);
    std::complex<double> phasor;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % kReseed == 0) {
        phasor = std::polar(1.0, kappa * geometry.x(i) * xi);
      } else {
        phasor *= step;
      }
      acc[i] += c * phasor;
    }
  }
}

std::vector<std::complex<double>> fresnel_values(const SlitGeometry& geometry, std::span<const Hole> holes,
                                                 std::size_t panels) {
  const auto& p = geometry.parameters();
  // Unit total flux through the (uniformly illuminated) wall apertures, and
  // the 1/sqrt(lambda L) propagator prefactor.
  const double amplitude = 1.0 / std::sqrt((p.hole_width_a + p.hole_width_b) * geometry.wavelength_distance());
  std::vector<std::complex<double>> acc(geometry.size());
  for (Hole hole : holes) accumulate_hole(geometry, hole, panels, amplitude, acc);
  return acc;
}

}  // namespace

TransverseAmplitude fresnel_oracle(const SlitGeometry& geometry, std::span<const Hole> open_holes,
                                   const QuadratureOptions& options) {
  if (open_holes.empty()) throw InvalidArgument("fresnel_oracle: no open holes");
  if (options.panels < 4 || options.panels % 2 != 0) throw InvalidArgument("fresnel_oracle: panels must be even and >= 4");
  std::vector<Hole> holes(open_holes.begin(), open_holes.end());
  std::sort(holes.begin(), holes.end());
  holes.erase(std::unique(holes.begin(), holes.end()), holes.end());

  TransverseAmplitude fine(geometry, fresnel_values(geometry, holes, options.panels));
  TransverseAmplitude coarse(geometry, fresnel_values(geometry, holes, options.panels / 2));

  std::vector<double> diff(geometry.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::norm(fine.values()[i] - coarse.values()[i]);
  const double change = std::sqrt(trapezoid(diff, geometry.step()) / fine.weight());
  if (!(change <= options.convergence_tolerance)) {
    throw NumericalError(describe("fresnel_oracle: quadrature not converged, relative change", change));
  }
  return fine;
}

double aligned_relative_l2_error(const TransverseAmplitude& reference, const TransverseAmplitude& candidate) {
  if (!reference.geometry().same_grid(candidate.geometry())) {
    throw InvalidArgument("aligned_relative_l2_error: amplitudes live on different grids");
  }
  const auto r = reference.values();
  const auto c = candidate.values();
  const std::size_t n = r.size();
  std::complex<double> cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    cross += w * std::conj(r[i]) * c[i];
  }
  cross *= reference.geometry().step();
  if (!(candidate.weight() > 0.0)) return reference.weight() > 0.0 ? 1.0 : 0.0;
  if (!(reference.weight() > 0.0)) return 1.0;
  const std::complex<double> fit = cross / reference.weight();

  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = std::norm(fit * r[i] - c[i]);
  return std::sqrt(trapezoid(residual, reference.geometry().step()) / candidate.weight());
}

// ---------------------------------------------------------------------------
// Visibility

Window central_window(const SlitGeometry& geometry, double periods) {
  const double half = 0.5 * periods * geometry.fringe_period();
  return {-half, half};
}

double visibility(const RealDensity& density, Window window) {
  const auto& geometry = density.geometry();
  const auto extent = geometry.extent();
  const double slack = 1e-12 * extent.width();
  if (window.lo < extent.lo - slack || window.hi > extent.hi + slack || !(window.lo < window.hi)) {
    throw InvalidArgument("visibility: window outside the grid");
  }
  if (window.width() < 2.0 * geometry.fringe_period() * (1.0 - 1e-9)) {
    throw InvalidArgument("visibility: window narrower than two fringe periods");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t count = 0;
  const auto values = density.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = geometry.x(i);
    if (x < window.lo || x > window.hi) continue;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
    ++count;
  }
  if (count < 2) throw InvalidArgument("visibility: window contains fewer than two grid nodes");
  return hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
}

}  // namespace whichpath
