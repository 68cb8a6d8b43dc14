#pragma once

#include "thinfilm/solve2d.hpp"

namespace thinfilm {

/// Discretized rescaled thin-film problem on Ω = ω × (-1, 1): trilinear
/// displacements clamped on ∂ω × (-1, 1), one-point quadrature, staircase
/// perimeter with face weight Ψ(ν_α | ν3 / ε).
struct SlabProblem {
  SlabMesh mesh;
  BulkDensitySpec bulk;
  LoadField load;
  std::optional<SurfaceDensitySpec> surface;  // isotropic perimeter when empty
  double epsilon = 1.0;

  SlabProblem(SlabMesh m, double eps) : mesh(std::move(m)), epsilon(eps) {}

  /// Throws DomainError for ε <= 0 or an invalid density spec.
  void validate() const;

  double face_weight(const SlabMesh::Face& face) const;
  /// Scaled gradient (∇_α u | ∇_3 u / ε) at the center of cell c.
  FullGradient cell_gradient(const Displacement& u, int c) const;
  Vec3 cell_value(const Displacement& u, int c) const;
};

EnergyBreakdown energy_3d(const SlabProblem& problem, const PhaseField& chi, const Displacement& u,
                          double target_fraction = -1.0);

DisplacementResult minimize_u_3d(const SlabProblem& problem, const PhaseField& chi, double tol = 1e-9,
                                 int max_iter = 5000, const Displacement* u0 = nullptr);

PhaseField update_phase_3d(const SlabProblem& problem, const Displacement& u, const PhaseField& chi,
                           std::uint64_t sweep_seed, SwapStats* stats = nullptr);

/// Quantities bounded along energy-bounded sequences.
struct CompactnessDiagnostics {
  double u_norm = 0.0;                    // (Σ vol |u(center)|²)^{1/2}
  double membrane_gradient_norm = 0.0;    // (Σ vol |∇_α u|²)^{1/2}
  double scaled_transverse_norm = 0.0;    // (Σ vol |∇_3 u / ε|²)^{1/2}
  double scaled_perimeter = 0.0;          // |(D_α χ | D_3 χ / ε)|(Ω)
  double transverse_interface_area = 0.0; // area of faces with normal e3
};

CompactnessDiagnostics compactness(const SlabProblem& problem, const PhaseField& chi, const Displacement& u);

struct SlabSolveResult {
  SolveResult solve;
  CompactnessDiagnostics diagnostics;
};

SlabSolveResult minimize_eps(const SlabProblem& problem, const SolveOptions& options);

/// x3-uniform extension of a planar state to the slab.
DesignState extrude(const SlabMesh& mesh, const DesignState& planar);

/// Vector polynomial v(y) = Σ coef y1^a y2^b y3^c on the thin domain.
struct VectorPolynomial {
  std::vector<LoadTerm> terms;
  Vec3 operator()(const Vec3& y) const;
  FullGradient gradient(const Vec3& y) const;
  int degree() const;
};

struct RoundtripReport {
  double physical = 0.0;   // (1/ε) ∫_{Ω(ε)} W(∇v)
  double rescaled = 0.0;   // ∫_Ω W(∇_α u | ∇_3 u / ε), u(x) = v(x_α, ε x3)
  double bulk_difference = 0.0;
  double perimeter_physical = 0.0;  // (1/ε) |D χ_{E(ε)}|(Ω(ε))
  double perimeter_rescaled = 0.0;  // |(D_α χ | D_3 χ / ε)|(Ω)
  double perimeter_difference = 0.0;
};

/// Checks the transverse change of variables for the bulk term (tensor
/// Gauss-Legendre quadrature on each side, over the cells of `mesh`) and for
/// the perimeter of `chi` (face sums on the thin and on the rescaled slab).
RoundtripReport rescale_roundtrip_check(const VectorPolynomial& v, double epsilon, const DensityKind& density,
                                        const SlabMesh& mesh, const PhaseField& chi);

}  // namespace thinfilm
