#pragma once

#include "thinfilm/densities.hpp"
#include "thinfilm/envelope.hpp"
#include "thinfilm/load.hpp"
#include "thinfilm/mesh.hpp"
#include "thinfilm/surface.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace thinfilm {

/// Binary phase field, one value per cell (1 selects W1).
struct PhaseField {
  std::vector<std::uint8_t> values;

  std::size_t ones() const;
  /// Achieved volume fraction on a uniform mesh.
  double fraction() const { return values.empty() ? 0.0 : static_cast<double>(ones()) / values.size(); }
  bool operator==(const PhaseField&) const = default;
};

/// Number of phase-1 cells for a target fraction. Throws DomainError unless
/// target * cells is an integer (within 1e-9) and target ∈ [0, 1].
std::size_t required_ones(std::size_t cells, double target_fraction);

/// Balanced random layout with exactly required_ones() phase-1 cells.
PhaseField random_phase(std::size_t cells, double target_fraction, std::uint64_t seed);

/// Nodal displacement, three entries per node (node-major).
using Displacement = Eigen::VectorXd;

struct EnergyBreakdown {
  double bulk = 0.0;
  double load = 0.0;
  double perimeter = 0.0;
  double total = 0.0;
  double constraint_residual = 0.0;  // achieved minus target fraction
  std::vector<double> log;           // totals along the last minimization
  std::size_t fallback_evaluations = 0;  // tabulated mode: cells outside the table
  bool stationary_suspect = false;       // line search stalled before tolerance
};

enum class DensityMode { Raw, Tabulated, ClosedForm };

std::string to_string(DensityMode mode);
DensityMode parse_density_mode(const std::string& text);

/// Discretized limit problem on ω: bilinear displacements clamped on ∂ω,
/// one-point quadrature at cell centers, staircase perimeter.
struct LimitProblem {
  PlanarMesh mesh;
  BulkDensitySpec bulk;
  LoadField load;
  std::optional<PlanarSurfaceDensity> surface;  // isotropic perimeter when empty
  DensityMode mode = DensityMode::Raw;
  std::shared_ptr<const EnvelopeTable> table;  // required by Tabulated

  explicit LimitProblem(PlanarMesh m) : mesh(std::move(m)) {}

  /// Throws DomainError for ClosedForm with a non-convex reduced density and
  /// for Tabulated without a table.
  void validate() const;

  /// Perimeter weight of an interior edge: length times Ψ̄**(normal).
  double edge_weight(const PlanarMesh::Edge& edge) const;

  /// ∇_α u at the center of cell c.
  MembraneGradient cell_gradient(const Displacement& u, int c) const;
  Vec3 cell_value(const Displacement& u, int c) const;
};

/// J0 = 2 Σ area QV̄(χ, ∇_α u) - Σ area (∫ f dx3) · u + 2 Σ interface weights.
EnergyBreakdown energy_2d(const LimitProblem& problem, const PhaseField& chi, const Displacement& u,
                          double target_fraction = -1.0);

struct DisplacementResult {
  Displacement u;
  EnergyBreakdown energy;
  int iterations = 0;
};

/// Descent on the free nodal values with χ fixed. Starts from `u0` when
/// given, else from zero.
DisplacementResult minimize_u(const LimitProblem& problem, const PhaseField& chi, double tol = 1e-9,
                              int max_iter = 5000, const Displacement* u0 = nullptr);

struct SwapStats {
  int accepted = 0;
  int passes = 0;
  double energy_change = 0.0;
};

/// Volume-preserving swap descent with u fixed. Returns the improved layout.
PhaseField update_phase(const LimitProblem& problem, const Displacement& u, const PhaseField& chi,
                        std::uint64_t sweep_seed, SwapStats* stats = nullptr);

struct DesignState {
  PhaseField chi;
  Displacement u;
};

struct RestartRecord {
  std::string label;  // "seed:<n>" or "warm:<k>"
  double total = 0.0;
  int alternations = 0;
  int swaps = 0;
};

enum class ExhaustiveMode { Auto, On, Off };

struct SolveOptions {
  double target_fraction = 0.5;
  int alternations = 40;
  std::vector<std::uint64_t> seeds{1};
  std::vector<DesignState> warm_starts;
  double tol = 1e-10;        // stop when an alternation gains less than this
  double u_tol = 1e-9;       // max-norm gradient tolerance of minimize_u
  int u_max_iter = 5000;
  ExhaustiveMode exhaustive = ExhaustiveMode::Auto;  // Auto: on for <= 16 cells
};

struct SolveResult {
  DesignState state;
  EnergyBreakdown energy;
  std::vector<RestartRecord> restarts;
  bool exhaustive = false;  // true: global discrete optimum over layouts
};

SolveResult solve_limit(const LimitProblem& problem, const SolveOptions& options);

}  // namespace thinfilm
