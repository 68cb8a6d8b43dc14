#include "thinfilm/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace thinfilm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain, counter-clockwise, collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

// ---------------------------------------------------------------------------
// AngularProfile

AngularProfile::AngularProfile(int n_theta, int n_z, std::vector<double> values)
    : n_theta_(n_theta), n_z_(n_z), values_(std::move(values)) {
  if (n_theta_ < 4 || n_z_ < 2) throw DomainError("angular profile: need n_theta >= 4 and n_z >= 2");
  if (static_cast<int>(values_.size()) != n_theta_ * n_z_) throw DomainError("angular profile: table size mismatch");
  for (double v : values_)
    if (!(v > 0) || !std::isfinite(v)) throw DomainError("angular profile: values must be positive and finite");
  for (int row : {0, n_z_ - 1}) {
    const double first = values_[row * n_theta_];
    for (int j = 1; j < n_theta_; ++j)
      if (values_[row * n_theta_ + j] != first) throw DomainError("angular profile: pole rows must be constant");
  }
}

AngularProfile AngularProfile::tabulate(int n_theta, int n_z, const std::function<double(double, double)>& g) {
  std::vector<double> values(static_cast<std::size_t>(n_theta) * n_z);
  for (int i = 0; i < n_z; ++i) {
    const double z = -1.0 + 2.0 * i / (n_z - 1);
    double row_sum = 0.0;
    for (int j = 0; j < n_theta; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / n_theta;
      values[i * n_theta + j] = g(theta, z);
      row_sum += values[i * n_theta + j];
    }
    if (i == 0 || i == n_z - 1)
      for (int j = 0; j < n_theta; ++j) values[i * n_theta + j] = row_sum / n_theta;
  }
  return AngularProfile(n_theta, n_z, std::move(values));
}

double AngularProfile::raw(const Vec3& unit) const {
  double theta = std::atan2(unit.y(), unit.x());
  if (theta < 0) theta += 2.0 * std::numbers::pi;
  const double z = std::clamp(unit.z(), -1.0, 1.0);

  const double ft = theta / (2.0 * std::numbers::pi) * n_theta_;
  int j0 = static_cast<int>(std::floor(ft));
  const double at = ft - j0;
  j0 = ((j0 % n_theta_) + n_theta_) % n_theta_;
  const int j1 = (j0 + 1) % n_theta_;

  const double fz = (z + 1.0) * 0.5 * (n_z_ - 1);
  int i0 = std::min(static_cast<int>(std::floor(fz)), n_z_ - 2);
  const double az = fz - i0;
  const int i1 = i0 + 1;

  auto at_grid = [&](int i, int j) { return values_[i * n_theta_ + j]; };
  return (1 - az) * ((1 - at) * at_grid(i0, j0) + at * at_grid(i0, j1)) +
         az * ((1 - at) * at_grid(i1, j0) + at * at_grid(i1, j1));
}

double AngularProfile::operator()(const Vec3& unit) const { return 0.5 * (raw(unit) + raw(-unit)); }

double AngularProfile::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double AngularProfile::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

// ---------------------------------------------------------------------------
// SurfaceDensitySpec

double SurfaceDensitySpec::operator()(const Vec3& nu) const {
  return std::visit(overloaded{
                        [&](const EuclideanSurface&) { return nu.norm(); },
                        [&](const WeightedQuadraticSurface& s) {
                          return std::sqrt(s.weights.dot(nu.cwiseProduct(nu)));
                        },
                        [&](const LpNormSurface& s) {
                          double acc = 0.0;
                          for (int i = 0; i < 3; ++i) acc += std::pow(std::abs(nu[i]), s.q);
                          return std::pow(acc, 1.0 / s.q);
                        },
                        [&](const AngularModulatedSurface& s) {
                          const double n = nu.norm();
                          if (n == 0.0) return 0.0;
                          return n * s.profile(nu / n);
                        },
                    },
                    kind);
}

double SurfaceDensitySpec::default_comparability(const SurfaceKind& kind) {
  return std::visit(overloaded{
                        [](const EuclideanSurface&) { return 1.0; },
                        [](const WeightedQuadraticSurface& s) {
                          return std::max(std::sqrt(s.weights.maxCoeff()), 1.0 / std::sqrt(s.weights.minCoeff()));
                        },
                        [](const LpNormSurface& s) { return std::pow(3.0, std::abs(1.0 / s.q - 0.5)); },
                        [](const AngularModulatedSurface& s) {
                          return std::max(s.profile.max_value(), 1.0 / s.profile.min_value());
                        },
                    },
                    kind);
}

SurfaceDensitySpec SurfaceDensitySpec::make(SurfaceKind kind) {
  SurfaceDensitySpec spec;
  spec.comparability = default_comparability(kind);
  spec.kind = std::move(kind);
  spec.validate();
  return spec;
}

void SurfaceDensitySpec::validate() const {
  std::visit(overloaded{
                 [](const EuclideanSurface&) {},
                 [](const WeightedQuadraticSurface& s) {
                   if (!(s.weights.array() > 0).all()) throw DomainError("weighted-quadratic surface: weights must be > 0");
                 },
                 [](const LpNormSurface& s) {
                   if (!(s.q >= 1) || !std::isfinite(s.q)) throw DomainError("lp-norm surface: q must be finite and >= 1");
                 },
                 [](const AngularModulatedSurface&) {},
             },
             kind);
  if (!(comparability >= default_comparability(kind) * (1.0 - 1e-12)))
    throw DomainError("surface density: comparability constant C too small for this kind");
}

bool SurfaceDensitySpec::monotone_in_transverse() const {
  return !std::holds_alternative<AngularModulatedSurface>(kind);
}

std::string surface_kind_name(const SurfaceKind& kind) {
  return std::visit(overloaded{
                        [](const EuclideanSurface&) { return std::string("euclidean"); },
                        [](const WeightedQuadraticSurface&) { return std::string("weighted-quadratic"); },
                        [](const LpNormSurface&) { return std::string("lp-norm"); },
                        [](const AngularModulatedSurface&) { return std::string("angular-modulated"); },
                    },
                    kind);
}

SurfaceReduction surface_reduce(const SurfaceDensitySpec& spec, const Vec2& eta) {
  if (!eta.allFinite()) throw DomainError("surface_reduce: non-finite direction");
  auto psi = [&](double xi) { return spec(Vec3(eta.x(), eta.y(), xi)); };

  SurfaceReduction out;
  const double eta_norm = eta.norm();
  if (eta_norm == 0.0 || spec.monotone_in_transverse()) {
    out.value = psi(0.0);
    return out;
  }

  const double bound = spec.comparability * spec.comparability * eta_norm;
  constexpr int kScan = 512;
  const double h = 2.0 * bound / kScan;
  int best = kScan / 2;
  double best_value = psi(0.0);
  for (int k = 0; k <= kScan; ++k) {
    const double v = psi(-bound + k * h);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }

  double lo = -bound + std::max(best - 1, 0) * h;
  double hi = -bound + std::min(best + 1, kScan) * h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = psi(x1), f2 = psi(x2);
  while (hi - lo > 1e-8) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = psi(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = psi(x2);
    }
  }
  out.xi = 0.5 * (lo + hi);
  out.value = psi(out.xi);
  const double scanned_xi = -bound + best * h;
  if (best_value < out.value) {
    out.value = best_value;
    out.xi = scanned_xi;
  }
  return out;
}

// ---------------------------------------------------------------------------
// PlanarSurfaceDensity

PlanarSurfaceDensity::PlanarSurfaceDensity(std::vector<double> angles, std::vector<double> reduced_values)
    : angles_(std::move(angles)), reduced_(std::move(reduced_values)) {
  const std::size_t m = angles_.size();
  if (m < 4 || m % 2 != 0 || reduced_.size() != m)
    throw DomainError("planar surface density: need an even number (>= 4) of samples");
  const std::size_t half = m / 2;

  std::vector<Vec2> unit_ball(m);
  for (std::size_t k = 0; k < half; ++k) {
    if (!(reduced_[k] > 0)) throw DomainError("planar surface density: reduced values must be positive");
    const Vec2 e(std::cos(angles_[k]), std::sin(angles_[k]));
    unit_ball[k] = e / reduced_[k];
    unit_ball[k + half] = -unit_ball[k];
  }

  // The dual body is the polar of the convex hull of the sampled unit sphere
  // of Ψ̄; each hull edge (a, b) yields the vertex w with <w,a> = <w,b> = 1.
  const std::vector<Vec2> hull = convex_hull(unit_ball);
  if (hull.size() < 3) throw SolverError("planar surface density: degenerate dual body");
  dual_vertices_.reserve(hull.size());
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    const double det = a.x() * b.y() - a.y() * b.x();
    if (!(det > 0)) throw SolverError("planar surface density: origin not interior to the sampled unit ball");
    dual_vertices_.emplace_back((b.y() - a.y()) / det, (a.x() - b.x()) / det);
  }
}

double PlanarSurfaceDensity::operator()(const Vec2& v) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec2& w : dual_vertices_) best = std::max(best, w.dot(v));
  return best;
}

PlanarSurfaceDensity convexify_planar(const SurfaceDensitySpec& spec, int direction_count) {
  if (direction_count < 16 || direction_count % 2 != 0)
    throw DomainError("convexify_planar: direction count must be even and >= 16");
  spec.validate();
  const int half = direction_count / 2;
  std::vector<double> angles(direction_count), values(direction_count);
  for (int k = 0; k < half; ++k) {
    angles[k] = 2.0 * std::numbers::pi * k / direction_count;
    angles[k + half] = angles[k] + std::numbers::pi;
    values[k] = surface_reduce(spec, Vec2(std::cos(angles[k]), std::sin(angles[k]))).value;
    values[k + half] = values[k];
  }
  return PlanarSurfaceDensity(std::move(angles), std::move(values));
}

}  // namespace thinfilm
