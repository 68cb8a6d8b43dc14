#include "thinfilm/solve3d.hpp"

#include "alternating.hpp"
#include "thinfilm/minimize.hpp"

#include <cmath>
#include <numbers>

namespace thinfilm {

void SlabProblem::validate() const {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive and finite");
  bulk.validate();
  if (surface) surface->validate();
}

double SlabProblem::face_weight(const SlabMesh::Face& face) const {
  Vec3 scaled = Vec3::Zero();
  scaled[face.normal_axis] = face.normal_axis == 2 ? 1.0 / epsilon : 1.0;
  return face.area * (surface ? (*surface)(scaled) : scaled.norm());
}

FullGradient SlabProblem::cell_gradient(const Displacement& u, int c) const {
  const std::array<int, 8> n = mesh.cell_nodes(c);
  const double hx = mesh.base().hx(), hy = mesh.base().hy(), hz = mesh.hz();
  FullGradient G = FullGradient::Zero();
  for (int l = 0; l < 8; ++l) {
    const Vec3 v = u.segment<3>(3 * n[l]);
    G.col(0) += (l & 1 ? 1.0 : -1.0) * v;
    G.col(1) += (l & 2 ? 1.0 : -1.0) * v;
    G.col(2) += (l & 4 ? 1.0 : -1.0) * v;
  }
  G.col(0) /= 4.0 * hx;
  G.col(1) /= 4.0 * hy;
  G.col(2) /= 4.0 * hz * epsilon;
  return G;
}

Vec3 SlabProblem::cell_value(const Displacement& u, int c) const {
  Vec3 sum = Vec3::Zero();
  for (int n : mesh.cell_nodes(c)) sum += u.segment<3>(3 * n);
  return sum / 8.0;
}

namespace {

void check_conforming(const SlabProblem& problem, const PhaseField& chi, const Displacement& u) {
  if (chi.values.size() != static_cast<std::size_t>(problem.mesh.cell_count()))
    throw DomainError("phase field does not match the slab mesh");
  if (u.size() != 3 * problem.mesh.node_count()) throw DomainError("displacement does not match the slab mesh");
  for (std::uint8_t v : chi.values)
    if (v > 1) throw DomainError("phase field values must be 0 or 1");
}

Eigen::VectorXd load_vector(const SlabProblem& problem) {
  const SlabMesh& mesh = problem.mesh;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * mesh.node_count());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const Vec3 x = mesh.cell_center(c);
    const Vec3 f = problem.load(x.x(), x.y(), x.z()) * (mesh.cell_volume() / 8.0);
    for (int n : mesh.cell_nodes(c)) b.segment<3>(3 * n) += f;
  }
  return b;
}

double perimeter_3d(const SlabProblem& problem, const PhaseField& chi) {
  double p = 0.0;
  for (const SlabMesh::Face& f : problem.mesh.interior_faces())
    if (chi.values[f.a] != chi.values[f.b]) p += problem.face_weight(f);
  return p;
}

class SlabModel {
 public:
  SlabModel(const SlabProblem& problem, double tol, int max_iter) : problem_(problem), tol_(tol), max_iter_(max_iter) {
    const SlabMesh& mesh = problem.mesh;
    graph_.incident.resize(mesh.cell_count());
    for (std::size_t l = 0; l < mesh.interior_faces().size(); ++l) {
      const SlabMesh::Face& f = mesh.interior_faces()[l];
      graph_.a.push_back(f.a);
      graph_.b.push_back(f.b);
      graph_.weight.push_back(problem.face_weight(f));
      graph_.incident[f.a].push_back(static_cast<int>(l));
      graph_.incident[f.b].push_back(static_cast<int>(l));
    }
  }

  std::size_t cells() const { return problem_.mesh.cell_count(); }

  EnergyBreakdown energy(const PhaseField& chi, const Displacement& u) const { return energy_3d(problem_, chi, u); }

  DisplacementResult minimize(const PhaseField& chi, const Displacement* u0) const {
    return minimize_u_3d(problem_, chi, tol_, max_iter_, u0);
  }

  PhaseField swap(const Displacement& u, const PhaseField& chi, std::uint64_t seed, SwapStats* stats) const {
    const SlabMesh& mesh = problem_.mesh;
    std::vector<double> one(cells()), two(cells());
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const FullGradient G = problem_.cell_gradient(u, c);
      one[c] = mesh.cell_volume() * eval_full(problem_.bulk, Phase::One, G);
      two[c] = mesh.cell_volume() * eval_full(problem_.bulk, Phase::Two, G);
    }
    PhaseField out = chi;
    const SwapStats s = detail::swap_descent(one, two, graph_, out.values, seed);
    if (stats) *stats = s;
    return out;
  }

 private:
  const SlabProblem& problem_;
  double tol_;
  int max_iter_;
  detail::SwapGraph graph_;
};

}  // namespace

EnergyBreakdown energy_3d(const SlabProblem& problem, const PhaseField& chi, const Displacement& u,
                          double target_fraction) {
  problem.validate();
  check_conforming(problem, chi, u);
  const SlabMesh& mesh = problem.mesh;
  EnergyBreakdown out;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    out.bulk += mesh.cell_volume() * eval_full(problem.bulk, phase_of(chi.values[c]), problem.cell_gradient(u, c));
    const Vec3 x = mesh.cell_center(c);
    out.load += mesh.cell_volume() * problem.load(x.x(), x.y(), x.z()).dot(problem.cell_value(u, c));
  }
  out.perimeter = perimeter_3d(problem, chi);
  out.total = out.bulk - out.load + out.perimeter;
  if (target_fraction >= 0.0) out.constraint_residual = chi.fraction() - target_fraction;
  return out;
}

DisplacementResult minimize_u_3d(const SlabProblem& problem, const PhaseField& chi, double tol, int max_iter,
                                 const Displacement* u0) {
  problem.validate();
  const SlabMesh& mesh = problem.mesh;
  Displacement start = u0 ? *u0 : Displacement::Zero(3 * mesh.node_count());
  check_conforming(problem, chi, start);

  std::vector<int> free_nodes;
  for (int n = 0; n < mesh.node_count(); ++n)
    if (!mesh.lateral_boundary_node(n)) free_nodes.push_back(n);
  const Eigen::VectorXd b = load_vector(problem);
  const double perimeter = perimeter_3d(problem, chi);

  Displacement full = Displacement::Zero(3 * mesh.node_count());
  Eigen::VectorXd full_grad(full.size());
  auto scatter = [&](const Eigen::VectorXd& x) {
    for (std::size_t k = 0; k < free_nodes.size(); ++k) full.segment<3>(3 * free_nodes[k]) = x.segment<3>(3 * k);
  };

  const double vol = mesh.cell_volume();
  const double cx = 1.0 / (4.0 * mesh.base().hx());
  const double cy = 1.0 / (4.0 * mesh.base().hy());
  const double cz = 1.0 / (4.0 * mesh.hz() * problem.epsilon);
  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    scatter(x);
    full_grad.setZero();
    double bulk = 0.0;
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const Phase phase = phase_of(chi.values[c]);
      const FullGradient G = problem.cell_gradient(full, c);
      bulk += vol * eval_full(problem.bulk, phase, G);
      const FullGradient dW = vol * density_gradient(problem.bulk.kind(phase), G);
      const std::array<int, 8> nodes = mesh.cell_nodes(c);
      for (int l = 0; l < 8; ++l)
        full_grad.segment<3>(3 * nodes[l]) += dW.col(0) * (l & 1 ? cx : -cx) + dW.col(1) * (l & 2 ? cy : -cy) +
                                              dW.col(2) * (l & 4 ? cz : -cz);
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
  out.energy = energy_3d(problem, chi, out.u);
  out.energy.log = std::move(run.log);
  out.energy.stationary_suspect = run.status == MinimizeStatus::LineSearchFailed;
  return out;
}

PhaseField update_phase_3d(const SlabProblem& problem, const Displacement& u, const PhaseField& chi,
                           std::uint64_t sweep_seed, SwapStats* stats) {
  problem.validate();
  check_conforming(problem, chi, u);
  return SlabModel(problem, 1e-9, 1).swap(u, chi, sweep_seed, stats);
}

CompactnessDiagnostics compactness(const SlabProblem& problem, const PhaseField& chi, const Displacement& u) {
  check_conforming(problem, chi, u);
  const SlabMesh& mesh = problem.mesh;
  CompactnessDiagnostics d;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const FullGradient G = problem.cell_gradient(u, c);
    d.u_norm += mesh.cell_volume() * problem.cell_value(u, c).squaredNorm();
    d.membrane_gradient_norm += mesh.cell_volume() * G.leftCols<2>().squaredNorm();
    d.scaled_transverse_norm += mesh.cell_volume() * G.col(2).squaredNorm();
  }
  d.u_norm = std::sqrt(d.u_norm);
  d.membrane_gradient_norm = std::sqrt(d.membrane_gradient_norm);
  d.scaled_transverse_norm = std::sqrt(d.scaled_transverse_norm);
  d.scaled_perimeter = perimeter_3d(problem, chi);
  for (const SlabMesh::Face& f : mesh.interior_faces())
    if (f.normal_axis == 2 && chi.values[f.a] != chi.values[f.b]) d.transverse_interface_area += f.area;
  return d;
}

SlabSolveResult minimize_eps(const SlabProblem& problem, const SolveOptions& options) {
  problem.validate();
  const SlabModel model(problem, options.u_tol, options.u_max_iter);
  SlabSolveResult out;
  out.solve = detail::alternate(model, options);
  out.solve.energy.constraint_residual = out.solve.state.chi.fraction() - options.target_fraction;
  out.diagnostics = compactness(problem, out.solve.state.chi, out.solve.state.u);
  return out;
}

DesignState extrude(const SlabMesh& mesh, const DesignState& planar) {
  const PlanarMesh& base = mesh.base();
  if (planar.chi.values.size() != static_cast<std::size_t>(base.cell_count()) ||
      planar.u.size() != 3 * base.node_count())
    throw DomainError("extrude: planar state does not match the base mesh");
  DesignState out;
  out.chi.values.resize(mesh.cell_count());
  for (int c = 0; c < mesh.cell_count(); ++c) out.chi.values[c] = planar.chi.values[mesh.planar_cell_of(c)];
  out.u.resize(3 * mesh.node_count());
  for (int n = 0; n < mesh.node_count(); ++n) out.u.segment<3>(3 * n) = planar.u.segment<3>(3 * (n % base.node_count()));
  return out;
}

// ---------------------------------------------------------------------------
// Change of variables

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

struct GaussRule {
  std::vector<double> nodes, weights;  // on [-1, 1]
};

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes.push_back(x);
    rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
  return rule;
}

// Tensor-product rule over [a0,b0] × [a1,b1] × [a2,b2].
template <class F>
double integrate_box(const GaussRule& rule, const Vec3& lo, const Vec3& hi, F&& f) {
  const Vec3 half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const Vec3 p(mid.x() + half.x() * rule.nodes[i], mid.y() + half.y() * rule.nodes[j],
                     mid.z() + half.z() * rule.nodes[k]);
        sum += rule.weights[i] * rule.weights[j] * rule.weights[k] * f(p);
      }
  return sum * half.x() * half.y() * half.z();
}

}  // namespace

Vec3 VectorPolynomial::operator()(const Vec3& y) const {
  Vec3 out = Vec3::Zero();
  for (const LoadTerm& t : terms)
    out += t.coefficient * (ipow(y.x(), t.exponents[0]) * ipow(y.y(), t.exponents[1]) * ipow(y.z(), t.exponents[2]));
  return out;
}

FullGradient VectorPolynomial::gradient(const Vec3& y) const {
  FullGradient G = FullGradient::Zero();
  for (const LoadTerm& t : terms)
    for (int d = 0; d < 3; ++d) {
      const int e = t.exponents[d];
      if (e == 0) continue;
      double m = e;
      for (int a = 0; a < 3; ++a) m *= ipow(y[a], a == d ? e - 1 : t.exponents[a]);
      G.col(d) += t.coefficient * m;
    }
  return G;
}

int VectorPolynomial::degree() const {
  int deg = 0;
  for (const LoadTerm& t : terms) deg = std::max(deg, t.exponents[0] + t.exponents[1] + t.exponents[2]);
  return deg;
}

RoundtripReport rescale_roundtrip_check(const VectorPolynomial& v, double epsilon, const DensityKind& density,
                                        const SlabMesh& mesh, const PhaseField& chi) {
  if (!(epsilon > 0)) throw DomainError("rescale check: epsilon must be positive");
  if (v.degree() > 3) throw DomainError("rescale check: polynomial degree must be <= 3");
  if (chi.values.size() != static_cast<std::size_t>(mesh.cell_count()))
    throw DomainError("rescale check: phase field does not match the slab mesh");

  const PlanarMesh& base = mesh.base();
  const GaussRule thin_rule = gauss_legendre(6);
  const GaussRule slab_rule = gauss_legendre(5);
  RoundtripReport report;

  double physical = 0.0, rescaled = 0.0;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const Vec3 center = mesh.cell_center(c);
    const Vec3 half(0.5 * base.hx(), 0.5 * base.hy(), 0.5 * mesh.hz());
    const Vec3 lo = center - half, hi = center + half;

    // Thin domain ω × (-ε, ε): the layer (z0, z1) maps to (ε z0, ε z1).
    const Vec3 thin_lo(lo.x(), lo.y(), epsilon * lo.z()), thin_hi(hi.x(), hi.y(), epsilon * hi.z());
    physical += integrate_box(thin_rule, thin_lo, thin_hi,
                              [&](const Vec3& y) { return density_value(density, v.gradient(y)); });

    rescaled += integrate_box(slab_rule, lo, hi, [&](const Vec3& x) {
      const Vec3 y(x.x(), x.y(), epsilon * x.z());
      FullGradient grad_u = v.gradient(y);
      grad_u.col(2) *= epsilon;  // ∂3 u = ε ∂3 v
      FullGradient scaled = grad_u;
      scaled.col(2) /= epsilon;
      return density_value(density, scaled);
    });
  }
  report.physical = physical / epsilon;
  report.rescaled = rescaled;
  report.bulk_difference = std::abs(report.physical - report.rescaled);

  double thin = 0.0, slab = 0.0;
  for (const SlabMesh::Face& f : mesh.interior_faces()) {
    if (chi.values[f.a] == chi.values[f.b]) continue;
    // On the thin domain lateral faces shrink by ε; transverse faces keep their area.
    thin += f.normal_axis == 2 ? f.area : f.area * epsilon;
    Vec3 scaled = Vec3::Zero();
    scaled[f.normal_axis] = f.normal_axis == 2 ? 1.0 / epsilon : 1.0;
    slab += f.area * scaled.norm();
  }
  report.perimeter_physical = thin / epsilon;
  report.perimeter_rescaled = slab;
  report.perimeter_difference = std::abs(report.perimeter_physical - report.perimeter_rescaled);
  return report;
}

}  // namespace thinfilm
