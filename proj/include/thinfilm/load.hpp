#pragma once

#include "thinfilm/core.hpp"

#include <array>
#include <vector>

namespace thinfilm {

/// One term coef * x1^e1 * x2^e2 * x3^e3 of a polynomial load.
struct LoadTerm {
  Vec3 coefficient = Vec3::Zero();
  std::array<int, 3> exponents{0, 0, 0};
};

/// Body load on the rescaled slab ω × (-1, 1). Zero and constant loads are
/// polynomials with no terms / one degree-0 term.
class LoadField {
 public:
  enum class Kind { Zero, Constant, Polynomial };

  LoadField() = default;
  static LoadField zero();
  static LoadField constant(const Vec3& value);
  static LoadField polynomial(std::vector<LoadTerm> terms);

  Kind kind() const { return kind_; }
  const std::vector<LoadTerm>& terms() const { return terms_; }

  Vec3 operator()(double x1, double x2, double x3) const;

  /// ∫_{-1}^{1} f(x1, x2, x3) dx3, exact.
  Vec3 transverse_integral(double x1, double x2) const;

  /// True when no term depends on x3.
  bool transverse_uniform() const;

  /// Conjugate exponent p' = p / (p - 1).
  static double conjugate_exponent(double p);

 private:
  Kind kind_ = Kind::Zero;
  std::vector<LoadTerm> terms_;
};

}  // namespace thinfilm
