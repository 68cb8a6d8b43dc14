#pragma once

#include "thinfilm/core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace thinfilm {

// ---------------------------------------------------------------------------
// Bulk density catalog. Every built-in kind except AnisotropicQuartic has a
// closed-form transverse reduction W̄(F̄) = inf_c W(F̄|c).
// ---------------------------------------------------------------------------

/// W(F) = alpha |F|^2
struct IsotropicQuadratic {
  double alpha = 1.0;
};

/// W(F) = alpha |F|^p
struct PowerLaw {
  double alpha = 1.0;
  double p = 2.0;
};

/// W(F) = alpha |F - A|^2
struct ShiftedQuadratic {
  FullGradient center = FullGradient::Zero();
  double alpha = 1.0;
};

/// W(F) = alpha min(|F - A+|^2, |F - A-|^2)
struct TwoWell {
  FullGradient plus = FullGradient::Zero();
  FullGradient minus = FullGradient::Zero();
  double alpha = 1.0;
};

/// W(F) = (|F|^2 - r^2)^2
struct QuarticWell {
  double radius = 1.0;
};

/// Test density without a closed-form reduction:
///   W(F) = mu |F̄|^2 + sum_ij k_ij F_ij^4 + gamma (|c|^2 - 1)^2 + rho (<c, F̄ m> - s)^2
/// It is non-convex in the transverse column c, so the reduction runs the
/// multistart inner minimization.
struct AnisotropicQuartic {
  double mu = 1.0;
  Eigen::Matrix3d k = Eigen::Matrix3d::Constant(0.1);
  double gamma = 1.0;
  double rho = 1.0;
  Vec2 m = Vec2(1.0, 0.0);
  double s = 0.5;
};

/// User-supplied density (value only; gradients by central differences).
struct CustomDensity {
  std::function<double(const FullGradient&)> value;
  std::string name = "custom";
};

using DensityKind =
    std::variant<IsotropicQuadratic, PowerLaw, ShiftedQuadratic, TwoWell, QuarticWell, AnisotropicQuartic, CustomDensity>;

/// Constants of the two-sided growth bound
///   beta_lower (|F|^p - 1) <= W(F) <= beta_upper (1 + |F|^p).
struct GrowthCertificate {
  double beta_lower = 1.0;
  double beta_upper = 1.0;
  double p = 2.0;
};

struct BulkDensitySpec {
  DensityKind phase1;  // χ = 1
  DensityKind phase2;  // χ = 0
  GrowthCertificate growth;

  const DensityKind& kind(Phase phase) const { return phase == Phase::One ? phase1 : phase2; }

  /// Throws DomainError unless beta_upper >= beta_lower > 0, p > 1 and every
  /// kind parameter is admissible.
  void validate() const;
};

std::string kind_name(const DensityKind& kind);
bool has_analytic_reduction(const DensityKind& kind);
/// True when W̄ is convex, so its quasiconvex envelope is W̄ itself.
bool reduction_is_convex(const DensityKind& kind);

double density_value(const DensityKind& kind, const FullGradient& F);
FullGradient density_gradient(const DensityKind& kind, const FullGradient& F);

/// V(χ, F) = χ W1(F) + (1 - χ) W2(F).
double eval_full(const BulkDensitySpec& spec, Phase phase, const FullGradient& F);

struct MembraneReduction {
  double value = 0.0;
  Vec3 argmin = Vec3::Zero();
  /// False when the inner minimization hit its iteration cap with the
  /// gradient above tolerance; `value` is then only an upper bound.
  bool certified = true;
};

/// W̄_i(F̄) = inf_c W_i(F̄|c), closed form for analytic kinds.
MembraneReduction reduce_membrane(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar);
MembraneReduction reduce_membrane(const DensityKind& kind, const GrowthCertificate& growth,
                                  const MembraneGradient& Fbar);

/// V̄(χ, F̄) = χ W̄1(F̄) + (1 - χ) W̄2(F̄).
double eval_membrane(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar);

/// ∂W̄/∂F̄, via the envelope theorem at the reduction argmin for numeric kinds.
MembraneGradient membrane_gradient(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar);

struct MembraneValueGradient {
  double value = 0.0;
  MembraneGradient gradient = MembraneGradient::Zero();
};

/// W̄ and ∂W̄/∂F̄ from a single reduction.
MembraneValueGradient membrane_value_gradient(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar);

struct GrowthViolation {
  std::string check;
  std::string phase;
  std::vector<double> point;  // row-major entries of the witness matrix
  double margin = 0.0;        // negative for a violation
};

struct GrowthReport {
  bool passed = true;
  std::size_t samples = 0;
  std::size_t checks = 0;
  double worst_margin = 0.0;
  std::string worst_check;
  std::optional<GrowthViolation> witness;  // first violation found
  std::size_t violations = 0;
};

/// Samples F in the ball of radius `radius` of R^{3x3} (and F̄ in R^{3x2}) and
/// checks the growth bounds for W1, W2, V̄ and the Lipschitz-in-χ bound
/// |V̄(1,F̄) - V̄(0,F̄)| <= 2 beta (1 + |F̄|^p). Deterministic in `seed`.
GrowthReport validate_growth(const BulkDensitySpec& spec, std::size_t sample_count, double radius,
                             std::uint64_t seed);

/// Uniform sample in the Frobenius ball of the given radius.
template <int Rows, int Cols>
Eigen::Matrix<double, Rows, Cols> sample_ball(SplitMix64& rng, double radius) {
  Eigen::Matrix<double, Rows, Cols> m;
  for (int i = 0; i < Rows; ++i)
    for (int j = 0; j < Cols; ++j) m(i, j) = rng.normal();
  const double n = m.norm();
  const double r = radius * std::pow(rng.uniform(), 1.0 / (Rows * Cols));
  return n > 0 ? Eigen::Matrix<double, Rows, Cols>(m * (r / n)) : m;
}

}  // namespace thinfilm
