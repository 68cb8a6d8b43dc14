#pragma once

#include "thinfilm/densities.hpp"

#include <optional>
#include <string>
#include <vector>

namespace thinfilm {

/// Search grid for first-order laminates
///   λ R(F̄ + (1-λ) t a⊗b) + (1-λ) R(F̄ - λ t a⊗b).
struct LaminationGrid {
  std::vector<double> fractions;  // λ ∈ [0, 1]
  std::vector<Vec3> a_directions;
  std::vector<Vec2> b_directions;
  std::vector<double> amplitudes;  // t > 0
  int refine_evaluations = 0;      // budget of the local pattern search (0 disables)

  /// λ ∈ {0, 1/16, ..., 1}; the 26 lattice directions of Z³ ∩ [-1,1]³;
  /// 16 circle directions; t ∈ {2^-4, ..., 2^3}; local refinement on.
  static LaminationGrid standard();
  /// Reduced grid evaluated inside the depth-2 search.
  static LaminationGrid inner();
  /// Outer grid of the depth-2 search.
  static LaminationGrid outer();

  std::size_t size() const { return fractions.size() * a_directions.size() * b_directions.size() * amplitudes.size(); }
};

struct LaminateResult {
  double value = 0.0;
  double fraction = 0.0;
  Vec3 a = Vec3::UnitX();
  Vec2 b = Vec2::UnitX();
  double amplitude = 0.0;
  int depth = 1;
};

using MembraneFunction = std::function<double(const MembraneGradient&)>;

/// Grid-then-refine minimization of the laminate functional over `grid`,
/// with `rank_one_base` as the density being laminated. λ = 0 is always
/// admissible, so the result never exceeds rank_one_base(F̄).
LaminateResult laminate_search(const MembraneFunction& rank_one_base, const MembraneGradient& Fbar,
                               const LaminationGrid& grid);

/// Upper bound for QW̄_i(F̄) from laminates of depth 1 or 2. Depth 2 laminates
/// the depth-1 bound (inner grid) and never exceeds the depth-1 value.
LaminateResult laminate_upper_detail(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar, int depth);
double laminate_upper(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar, int depth);

struct CellProblemOptions {
  int random_starts = 4;
  std::uint64_t seed = 7;
  double grad_tol = 1e-10;
  int max_iter = 3000;
  bool warm_start_from_coarse = true;
};

struct CellProblemResult {
  double value = 0.0;
  bool certified = true;  // false when the best descent stopped without stationarity
  int cells = 1;
  /// Interior nodal values of the best φ, node (i,j) at index 3 * ((j-1)(N-1) + (i-1)).
  Eigen::VectorXd interior;
};

/// Discrete cell problem inf_φ ∫_{(0,1)²} W̄(F̄ + ∇φ), φ = 0 on the boundary,
/// on an N×N grid split into P1 triangles (each square cut along the
/// (i,j)-(i+1,j+1) diagonal). The triangulations are nested in N → 2N, and
/// the 2N solve is warm-started from the interpolated N solution, so the
/// value is non-increasing along N, 2N, 4N, ...
CellProblemResult cell_problem_upper_detail(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar,
                                            int n, const CellProblemOptions& options = {});
double cell_problem_upper(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar, int n);

/// Energy of the cell problem for given interior nodal values (exact P1
/// integration).
double cell_problem_energy(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar, int n,
                           const Eigen::VectorXd& interior);

/// Affine 2-plane {origin + s dir1 + t dir2} in R^{3x2}, with the grid box.
struct Slice {
  MembraneGradient origin = MembraneGradient::Zero();
  MembraneGradient dir1 = MembraneGradient::Zero();
  MembraneGradient dir2 = MembraneGradient::Zero();
  double s_min = -1.0, s_max = 1.0;
  double t_min = -1.0, t_max = 1.0;

  /// Throws DomainError unless dir1, dir2 are Frobenius-orthonormal and the box is non-empty.
  void validate() const;
  MembraneGradient at(double s, double t) const { return origin + s * dir1 + t * dir2; }
  double s_at(int i, int grid) const { return s_min + (s_max - s_min) * i / (grid - 1); }
  double t_at(int j, int grid) const { return t_min + (t_max - t_min) * j / (grid - 1); }
};

struct EnvelopeEstimate {
  MembraneGradient point = MembraneGradient::Zero();
  double s = 0.0, t = 0.0;
  double raw = 0.0;    // W̄(point)
  double lower = 0.0;  // discrete convex envelope of W̄ on the slice, capped by `upper`
  double upper = 0.0;  // min(laminate, cell problem)
  std::string method_lower = "convex-envelope-slice";
  std::string method_upper;
  bool lower_capped = false;  // the slice envelope exceeded the upper bound
  bool certified = true;
};

struct EnvelopeSliceOptions {
  int laminate_depth = 2;
  int cell_n = 4;
};

/// Envelope bracket at every node of a grid×grid tabulation of the slice
/// (row-major in t, then s). The lower value is a heuristic: it bounds QW̄
/// from below on the slice only where QW̄ restricted to the slice is convex.
std::vector<EnvelopeEstimate> envelope_slice(const BulkDensitySpec& spec, Phase phase, const Slice& slice, int grid,
                                             const EnvelopeSliceOptions& options = {});

/// Lower convex envelope of gridded values at the grid nodes (exact up to
/// 1e-12 relative): values[j * ns + i] sits at (s[i], t[j]).
std::vector<double> grid_convex_envelope(const std::vector<double>& s, const std::vector<double>& t,
                                         const std::vector<double>& values);

/// Tabulated upper envelopes of both phases on one slice, evaluated by
/// bilinear interpolation for gradients lying on the slice.
class EnvelopeTable {
 public:
  EnvelopeTable(Slice slice, int grid, std::vector<double> phase1, std::vector<double> phase2);
  static EnvelopeTable build(const BulkDensitySpec& spec, const Slice& slice, int grid,
                             const EnvelopeSliceOptions& options = {});

  struct Lookup {
    double value;
    MembraneGradient gradient;
  };
  /// Empty when F̄ is off the slice plane or outside the tabulated box.
  std::optional<Lookup> lookup(Phase phase, const MembraneGradient& Fbar) const;

  const Slice& slice() const { return slice_; }
  int grid() const { return grid_; }

 private:
  Slice slice_;
  int grid_;
  std::vector<double> phase1_;
  std::vector<double> phase2_;
};

}  // namespace thinfilm
