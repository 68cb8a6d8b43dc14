#include "thinfilm/solve2d.hpp"

#include "alternating.hpp"
#include "thinfilm/minimize.hpp"

#include <cmath>

namespace thinfilm {

std::size_t PhaseField::ones() const {
  std::size_t n = 0;
  for (std::uint8_t v : values) n += v ? 1 : 0;
  return n;
}

std::size_t required_ones(std::size_t cells, double target_fraction) {
  if (!(target_fraction >= 0.0 && target_fraction <= 1.0))
    throw DomainError("target fraction must lie in [0, 1]");
  const double exact = target_fraction * static_cast<double>(cells);
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9)
    throw DomainError("target fraction " + std::to_string(target_fraction) + " is not representable by whole cells (" +
                      std::to_string(cells) + " cells)");
  return static_cast<std::size_t>(rounded);
}

PhaseField random_phase(std::size_t cells, double target_fraction, std::uint64_t seed) {
  const std::size_t k = required_ones(cells, target_fraction);
  std::vector<std::size_t> order(cells);
  for (std::size_t c = 0; c < cells; ++c) order[c] = c;
  SplitMix64 rng(seed);
  for (std::size_t i = cells; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  PhaseField chi;
  chi.values.assign(cells, 0);
  for (std::size_t m = 0; m < k; ++m) chi.values[order[m]] = 1;
  return chi;
}

std::string to_string(DensityMode mode) {
  switch (mode) {
    case DensityMode::Raw: return "raw";
    case DensityMode::Tabulated: return "tabulated";
    case DensityMode::ClosedForm: return "closed-form";
  }
  return "raw";
}

DensityMode parse_density_mode(const std::string& text) {
  if (text == "raw") return DensityMode::Raw;
  if (text == "tabulated") return DensityMode::Tabulated;
  if (text == "closed-form") return DensityMode::ClosedForm;
  throw DomainError("unknown density mode '" + text + "' (expected raw, tabulated or closed-form)");
}

void LimitProblem::validate() const {
  bulk.validate();
  if (mode == DensityMode::ClosedForm && !(reduction_is_convex(bulk.phase1) && reduction_is_convex(bulk.phase2)))
    throw DomainError("closed-form QV̄ is only available when both reduced densities are convex");
  if (mode == DensityMode::Tabulated && !table) throw DomainError("tabulated density mode needs an envelope table");
}

double LimitProblem::edge_weight(const PlanarMesh::Edge& edge) const {
  if (!surface) return edge.length;
  return edge.length * (*surface)(edge.normal_axis == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0));
}

MembraneGradient LimitProblem::cell_gradient(const Displacement& u, int c) const {
  const std::array<int, 4> n = mesh.cell_nodes(c);
  const Vec3 u0 = u.segment<3>(3 * n[0]), u1 = u.segment<3>(3 * n[1]);
  const Vec3 u2 = u.segment<3>(3 * n[2]), u3 = u.segment<3>(3 * n[3]);
  MembraneGradient G;
  G.col(0) = (u1 + u3 - u0 - u2) / (2.0 * mesh.hx());
  G.col(1) = (u2 + u3 - u0 - u1) / (2.0 * mesh.hy());
  return G;
}

Vec3 LimitProblem::cell_value(const Displacement& u, int c) const {
  const std::array<int, 4> n = mesh.cell_nodes(c);
  return 0.25 * (u.segment<3>(3 * n[0]) + u.segment<3>(3 * n[1]) + u.segment<3>(3 * n[2]) + u.segment<3>(3 * n[3]));
}

namespace {

struct CellDensity {
  double value;
  MembraneGradient gradient;
  bool fallback;
};

CellDensity evaluate_density(const LimitProblem& problem, Phase phase, const MembraneGradient& G, bool with_gradient) {
  if (problem.mode == DensityMode::Tabulated) {
    if (const auto hit = problem.table->lookup(phase, G)) return {hit->value, hit->gradient, false};
  }
  if (!with_gradient) return {eval_membrane(problem.bulk, phase, G), MembraneGradient::Zero(), problem.mode == DensityMode::Tabulated};
  const MembraneValueGradient vg = membrane_value_gradient(problem.bulk, phase, G);
  return {vg.value, vg.gradient, problem.mode == DensityMode::Tabulated};
}

void check_conforming(const LimitProblem& problem, const PhaseField& chi, const Displacement& u) {
  if (chi.values.size() != static_cast<std::size_t>(problem.mesh.cell_count()))
    throw DomainError("phase field does not match the mesh");
  if (u.size() != 3 * problem.mesh.node_count()) throw DomainError("displacement does not match the mesh");
  for (std::uint8_t v : chi.values)
    if (v > 1) throw DomainError("phase field values must be 0 or 1");
}

// Nodal load vector b with load term b · u.
Eigen::VectorXd load_vector(const LimitProblem& problem) {
  const PlanarMesh& mesh = problem.mesh;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * mesh.node_count());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const Vec2 x = mesh.cell_center(c);
    const Vec3 f = problem.load.transverse_integral(x.x(), x.y()) * (0.25 * mesh.cell_area());
    for (int n : mesh.cell_nodes(c)) b.segment<3>(3 * n) += f;
  }
  return b;
}

double perimeter_2d(const LimitProblem& problem, const PhaseField& chi) {
  double p = 0.0;
  for (const PlanarMesh::Edge& e : problem.mesh.interior_edges())
    if (chi.values[e.a] != chi.values[e.b]) p += 2.0 * problem.edge_weight(e);
  return p;
}

class PlanarModel {
 public:
  PlanarModel(const LimitProblem& problem, double tol, int max_iter)
      : problem_(problem), tol_(tol), max_iter_(max_iter) {
    const PlanarMesh& mesh = problem.mesh;
    for (int n = 0; n < mesh.node_count(); ++n)
      if (!mesh.boundary_node(n)) free_.push_back(n);
    graph_.incident.resize(mesh.cell_count());
    for (std::size_t l = 0; l < mesh.interior_edges().size(); ++l) {
      const PlanarMesh::Edge& e = mesh.interior_edges()[l];
      graph_.a.push_back(e.a);
      graph_.b.push_back(e.b);
      graph_.weight.push_back(2.0 * problem.edge_weight(e));
      graph_.incident[e.a].push_back(static_cast<int>(l));
      graph_.incident[e.b].push_back(static_cast<int>(l));
    }
  }

  std::size_t cells() const { return problem_.mesh.cell_count(); }

  EnergyBreakdown energy(const PhaseField& chi, const Displacement& u) const { return energy_2d(problem_, chi, u); }

  DisplacementResult minimize(const PhaseField& chi, const Displacement* u0) const {
    return minimize_u(problem_, chi, tol_, max_iter_, u0);
  }

  PhaseField swap(const Displacement& u, const PhaseField& chi, std::uint64_t seed, SwapStats* stats) const {
    const PlanarMesh& mesh = problem_.mesh;
    std::vector<double> one(cells()), two(cells());
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const MembraneGradient G = problem_.cell_gradient(u, c);
      const double w = 2.0 * mesh.cell_area();
      one[c] = w * evaluate_density(problem_, Phase::One, G, false).value;
      two[c] = w * evaluate_density(problem_, Phase::Two, G, false).value;
    }
    PhaseField out = chi;
    const SwapStats s = detail::swap_descent(one, two, graph_, out.values, seed);
    if (stats) *stats = s;
    return out;
  }

  const std::vector<int>& free_nodes() const { return free_; }

 private:
  const LimitProblem& problem_;
  double tol_;
  int max_iter_;
  std::vector<int> free_;
  detail::SwapGraph graph_;
};

}  // namespace

EnergyBreakdown energy_2d(const LimitProblem& problem, const PhaseField& chi, const Displacement& u,
                          double target_fraction) {
  check_conforming(problem, chi, u);
  const PlanarMesh& mesh = problem.mesh;
  EnergyBreakdown out;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const CellDensity d = evaluate_density(problem, phase_of(chi.values[c]), problem.cell_gradient(u, c), false);
    out.bulk += 2.0 * mesh.cell_area() * d.value;
    out.fallback_evaluations += d.fallback ? 1 : 0;
    const Vec2 x = mesh.cell_center(c);
    out.load += mesh.cell_area() * problem.load.transverse_integral(x.x(), x.y()).dot(problem.cell_value(u, c));
  }
  out.perimeter = perimeter_2d(problem, chi);
  out.total = out.bulk - out.load + out.perimeter;
  if (target_fraction >= 0.0) out.constraint_residual = chi.fraction() - target_fraction;
  return out;
}

DisplacementResult minimize_u(const LimitProblem& problem, const PhaseField& chi, double tol, int max_iter,
                              const Displacement* u0) {
  problem.validate();
  const PlanarMesh& mesh = problem.mesh;
  Displacement start = u0 ? *u0 : Displacement::Zero(3 * mesh.node_count());
  check_conforming(problem, chi, start);

  std::vector<int> free_nodes;
  for (int n = 0; n < mesh.node_count(); ++n)
    if (!mesh.boundary_node(n)) free_nodes.push_back(n);
  const Eigen::VectorXd b = load_vector(problem);
  const double perimeter = perimeter_2d(problem, chi);

  Displacement full = Displacement::Zero(3 * mesh.node_count());
  Eigen::VectorXd full_grad(full.size());
  auto scatter = [&](const Eigen::VectorXd& x) {
    for (std::size_t k = 0; k < free_nodes.size(); ++k) full.segment<3>(3 * free_nodes[k]) = x.segment<3>(3 * k);
  };

  const double weight = 2.0 * mesh.cell_area();
  const double cx = 1.0 / (2.0 * mesh.hx()), cy = 1.0 / (2.0 * mesh.hy());
  const std::array<double, 4> sx{-cx, cx, -cx, cx}, sy{-cy, -cy, cy, cy};
  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    scatter(x);
    full_grad.setZero();
    double bulk = 0.0;
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const CellDensity d =
          evaluate_density(problem, phase_of(chi.values[c]), problem.cell_gradient(full, c), true);
      bulk += weight * d.value;
      const std::array<int, 4> nodes = mesh.cell_nodes(c);
      for (int a = 0; a < 4; ++a)
        full_grad.segment<3>(3 * nodes[a]) += weight * (d.gradient.col(0) * sx[a] + d.gradient.col(1) * sy[a]);
    }
    full_grad -= b;
    grad.resize(x.size());
    for (std::size_t k = 0; k < free_nodes.size(); ++k) grad.segment<3>(3 * k) = full_grad.segment<3>(3 * free_nodes[k]);
    return bulk - b.dot(full) + perimeter;
  };

  Eigen::VectorXd x0(3 * free_nodes.size());
  for (std::size_t k = 0; k < free_nodes.size(); ++k) x0.segment<3>(3 * k) = start.segment<3>(3 * free_nodes[k]);

  MinimizeOptions options;
  options.grad_tol = tol;
  options.max_iter = max_iter;
  options.record_log = true;
  MinimizeResult run = lbfgs(objective, x0, options);

  DisplacementResult out;
  full.setZero();
  scatter(run.x);
  out.u = full;
  out.iterations = run.iterations;
  out.energy = energy_2d(problem, chi, out.u);
  out.energy.log = std::move(run.log);
  out.energy.stationary_suspect = run.status == MinimizeStatus::LineSearchFailed;
  return out;
}

PhaseField update_phase(const LimitProblem& problem, const Displacement& u, const PhaseField& chi,
                        std::uint64_t sweep_seed, SwapStats* stats) {
  problem.validate();
  check_conforming(problem, chi, u);
  return PlanarModel(problem, 1e-9, 1).swap(u, chi, sweep_seed, stats);
}

SolveResult solve_limit(const LimitProblem& problem, const SolveOptions& options) {
  problem.validate();
  const PlanarModel model(problem, options.u_tol, options.u_max_iter);
  SolveResult result = detail::alternate(model, options);
  result.energy.constraint_residual = result.state.chi.fraction() - options.target_fraction;
  return result;
}

}  // namespace thinfilm
