#pragma once

// Independent reference computations. They share no assembly or search code
// with the solvers they check, and are slow by design.

#include "thinfilm/solve3d.hpp"

namespace thinfilm::oracle {

/// Planar energy re-assembled from shape functions evaluated at the cell
/// centers, with the transverse load integral done by Gauss-Legendre.
EnergyBreakdown naive_energy_2d(const LimitProblem& problem, const PhaseField& chi, const Displacement& u);
EnergyBreakdown naive_energy_3d(const SlabProblem& problem, const PhaseField& chi, const Displacement& u);

/// Minimum over u of the planar energy for W_i = alpha_i |F|^2 (both phases
/// isotropic-quadratic), by a sparse LDLT solve of the normal equations.
struct QuadraticSolve {
  double energy = 0.0;
  Displacement u;
};
QuadraticSolve quadratic_direct_solve(const LimitProblem& problem, const PhaseField& chi);

/// Global optimum over every layout with the target number of phase-1 cells,
/// each scored by quadratic_direct_solve.
struct ExhaustiveOptimum {
  double energy = 0.0;
  PhaseField chi;
  std::size_t layouts = 0;
};
ExhaustiveOptimum exhaustive_quadratic_optimum(const LimitProblem& problem, double target_fraction);

/// inf_ξ Ψ(η, ξ) by a uniform ξ grid of the given step over [-C²|η|, C²|η|]
/// followed by ternary refinement around the best node.
double reduced_surface_by_grid(const SurfaceDensitySpec& spec, const Vec2& eta, double step = 1e-4);

/// Convex envelope of a 1-homogeneous planar function known on the angles
/// `angles` with values `values`: min of a Ψ̄(e_i) + b Ψ̄(e_j) over all sample
/// pairs and a, b >= 0 with a e_i + b e_j = v.
double homogeneous_hull(const std::vector<double>& angles, const std::vector<double>& values, const Vec2& v);

/// inf_c W(F̄|c) by brute force over the grid step·Z³ ∩ [-2, 2]³, then a
/// shrinking pattern search from the best node.
MembraneReduction reduce_by_grid(const DensityKind& kind, const MembraneGradient& Fbar, double step = 1e-2);

}  // namespace thinfilm::oracle
