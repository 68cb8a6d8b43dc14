#pragma once

#include "thinfilm/core.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace thinfilm {

/// Ψ(ν) = |ν|
struct EuclideanSurface {};

/// Ψ(ν) = sqrt(w1 ν1² + w2 ν2² + w3 ν3²)
struct WeightedQuadraticSurface {
  Vec3 weights = Vec3::Ones();
};

/// Ψ(ν) = ‖ν‖_q
struct LpNormSurface {
  double q = 2.0;
};

/// Tabulated profile g on the unit sphere, indexed by the in-plane angle
/// θ ∈ [0, 2π) (periodic, n_theta columns) and z = ν3 ∈ [-1, 1]
/// (n_z rows including both poles). Evaluation is bilinear and symmetrized,
/// so the resulting Ψ is exactly even.
class AngularProfile {
 public:
  AngularProfile(int n_theta, int n_z, std::vector<double> values);

  /// Tabulates g(θ, z) on the grid. Pole rows are averaged to keep g continuous.
  static AngularProfile tabulate(int n_theta, int n_z, const std::function<double(double theta, double z)>& g);

  double operator()(const Vec3& unit) const;
  double min_value() const;
  double max_value() const;
  int n_theta() const { return n_theta_; }
  int n_z() const { return n_z_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double raw(const Vec3& unit) const;

  int n_theta_;
  int n_z_;
  std::vector<double> values_;  // row-major, z rows
};

/// Ψ(ν) = |ν| g(ν/|ν|)
struct AngularModulatedSurface {
  AngularProfile profile;
};

using SurfaceKind = std::variant<EuclideanSurface, WeightedQuadraticSurface, LpNormSurface, AngularModulatedSurface>;

/// Even, continuous, positively 1-homogeneous Ψ on R^3 with
/// (1/C)|ν| <= Ψ(ν) <= C|ν|.
struct SurfaceDensitySpec {
  SurfaceKind kind = EuclideanSurface{};
  double comparability = 1.0;  // C

  double operator()(const Vec3& normal) const;

  /// Throws DomainError on bad parameters or C < 1.
  void validate() const;

  /// Smallest C valid for the kind (exact for the closed-form kinds, table
  /// extrema for the angular profile).
  static double default_comparability(const SurfaceKind& kind);
  static SurfaceDensitySpec make(SurfaceKind kind);

  /// True when Ψ(η, ξ) is non-decreasing in |ξ|, so inf_ξ sits at ξ = 0.
  bool monotone_in_transverse() const;
};

std::string surface_kind_name(const SurfaceKind& kind);

struct SurfaceReduction {
  double value = 0.0;  // Ψ̄(η)
  double xi = 0.0;     // a minimizing transverse component
};

/// Ψ̄(η) = inf_ξ Ψ(η, ξ). Coarse scan of [-C²|η|, C²|η|] followed by
/// golden-section refinement to 1e-8 in ξ.
SurfaceReduction surface_reduce(const SurfaceDensitySpec& spec, const Vec2& eta);

/// Convex envelope Ψ̄** of the reduced density, built from M equispaced
/// samples via the dual body K = {w : <w, e_θ> <= Ψ̄(e_θ)}.
/// Ψ̄**(v) = max over vertices w of K of <w, v>.
class PlanarSurfaceDensity {
 public:
  PlanarSurfaceDensity(std::vector<double> angles, std::vector<double> reduced_values);

  /// Ψ̄**(v).
  double operator()(const Vec2& v) const;

  int direction_count() const { return static_cast<int>(angles_.size()); }
  const std::vector<double>& angles() const { return angles_; }
  const std::vector<double>& reduced_values() const { return reduced_; }
  const std::vector<Vec2>& dual_vertices() const { return dual_vertices_; }

 private:
  std::vector<double> angles_;
  std::vector<double> reduced_;
  std::vector<Vec2> dual_vertices_;
};

/// M >= 16 and even; evenness is exact because the second half of the
/// samples mirrors the first.
PlanarSurfaceDensity convexify_planar(const SurfaceDensitySpec& spec, int direction_count);

}  // namespace thinfilm
