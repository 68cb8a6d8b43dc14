#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace thinfilm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Deformation gradient F = (F̄ | c). Columns 0-1 are the in-plane block,
/// column 2 the transverse vector.
using FullGradient = Eigen::Matrix3d;

/// In-plane block F̄ of a deformation gradient.
using MembraneGradient = Eigen::Matrix<double, 3, 2>;

/// Value of the characteristic function at a point. `One` selects W1.
enum class Phase : std::uint8_t { Two = 0, One = 1 };

constexpr double chi(Phase phase) { return phase == Phase::One ? 1.0 : 0.0; }
constexpr Phase phase_of(std::uint8_t value) { return value ? Phase::One : Phase::Two; }

/// Invalid argument or state with respect to the mathematical setting.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical solver could not produce a usable result.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline FullGradient compose(const MembraneGradient& membrane, const Vec3& transverse) {
  FullGradient full;
  full.leftCols<2>() = membrane;
  full.col(2) = transverse;
  return full;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Frobenius inner product.
template <typename A, typename B>
double frob_dot(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.cwiseProduct(b).sum();
}

/// Deterministic generator with a platform-independent mapping to doubles,
/// so seeded runs give bit-identical sample sequences everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace thinfilm
