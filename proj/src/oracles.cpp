#include "thinfilm/oracles.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace thinfilm::oracle {

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr double kGaussNodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                   0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGaussWeights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                     0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

double planar_density(const LimitProblem& problem, Phase phase, const MembraneGradient& G) {
  if (problem.mode == DensityMode::Tabulated)
    if (const auto hit = problem.table->lookup(phase, G)) return hit->value;
  return eval_membrane(problem.bulk, phase, G);
}

double planar_normal_weight(const LimitProblem& problem, const Vec2& n) {
  return problem.surface ? (*problem.surface)(n) : n.norm();
}

}  // namespace

EnergyBreakdown naive_energy_2d(const LimitProblem& problem, const PhaseField& chi, const Displacement& u) {
  const PlanarMesh& m = problem.mesh;
  const int nx = m.nx(), ny = m.ny();
  const double hx = m.lx() / nx, hy = m.ly() / ny;
  EnergyBreakdown e;
  auto node_u = [&](int i, int j) -> Vec3 { return u.segment<3>(3 * (j * (nx + 1) + i)); };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x0 = i * hx, x1 = (i + 1) * hx, y0 = j * hy, y1 = (j + 1) * hy;
      const double x = 0.5 * (x0 + x1), y = 0.5 * (y0 + y1);
      // Bilinear shape functions N(x, y) and their derivatives at the center.
      const double area = hx * hy;
      const Vec3 u00 = node_u(i, j), u10 = node_u(i + 1, j), u01 = node_u(i, j + 1), u11 = node_u(i + 1, j + 1);
      const Vec3 value = (u00 * (x1 - x) * (y1 - y) + u10 * (x - x0) * (y1 - y) + u01 * (x1 - x) * (y - y0) +
                          u11 * (x - x0) * (y - y0)) /
                         area;
      MembraneGradient G;
      G.col(0) = (-u00 * (y1 - y) + u10 * (y1 - y) - u01 * (y - y0) + u11 * (y - y0)) / area;
      G.col(1) = (-u00 * (x1 - x) - u10 * (x - x0) + u01 * (x1 - x) + u11 * (x - x0)) / area;

      const Phase phase = chi.values[j * nx + i] ? Phase::One : Phase::Two;
      e.bulk += 2.0 * area * planar_density(problem, phase, G);

      Vec3 f = Vec3::Zero();
      for (int q = 0; q < 8; ++q) f += kGaussWeights[q] * problem.load(x, y, kGaussNodes[q]);
      e.load += area * f.dot(value);
    }
  }

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      if (chi.values[j * nx + i] != chi.values[j * nx + i + 1])
        e.perimeter += 2.0 * hy * planar_normal_weight(problem, Vec2(1.0, 0.0));
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (chi.values[j * nx + i] != chi.values[(j + 1) * nx + i])
        e.perimeter += 2.0 * hx * planar_normal_weight(problem, Vec2(0.0, 1.0));

  e.total = e.bulk - e.load + e.perimeter;
  return e;
}

EnergyBreakdown naive_energy_3d(const SlabProblem& problem, const PhaseField& chi, const Displacement& u) {
  const PlanarMesh& base = problem.mesh.base();
  const int nx = base.nx(), ny = base.ny(), nz = problem.mesh.layers();
  const double hx = base.lx() / nx, hy = base.ly() / ny, hz = 2.0 / nz;
  const double eps = problem.epsilon;
  EnergyBreakdown e;
  auto node_u = [&](int i, int j, int k) -> Vec3 {
    return u.segment<3>(3 * (k * (nx + 1) * (ny + 1) + j * (nx + 1) + i));
  };
  auto phase_at = [&](int i, int j, int k) { return chi.values[k * nx * ny + j * nx + i]; };
  auto weight = [&](const Vec3& scaled_normal) {
    return problem.surface ? (*problem.surface)(scaled_normal) : scaled_normal.norm();
  };

  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double vol = hx * hy * hz;
        // Trilinear shape functions at the center: all weights 1/8, derivatives ±1/(4h).
        Vec3 value = Vec3::Zero();
        FullGradient G = FullGradient::Zero();
        for (int dk = 0; dk < 2; ++dk)
          for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
              const Vec3 un = node_u(i + di, j + dj, k + dk);
              value += un / 8.0;
              G.col(0) += un * ((di ? 1.0 : -1.0) * 0.25 / hx);
              G.col(1) += un * ((dj ? 1.0 : -1.0) * 0.25 / hy);
              G.col(2) += un * ((dk ? 1.0 : -1.0) * 0.25 / hz / eps);
            }
        const Phase phase = phase_at(i, j, k) ? Phase::One : Phase::Two;
        e.bulk += vol * eval_full(problem.bulk, phase, G);
        const Vec3 x((i + 0.5) * hx, (j + 0.5) * hy, -1.0 + (k + 0.5) * hz);
        e.load += vol * problem.load(x.x(), x.y(), x.z()).dot(value);

        if (i + 1 < nx && phase_at(i, j, k) != phase_at(i + 1, j, k)) e.perimeter += hy * hz * weight(Vec3(1, 0, 0));
        if (j + 1 < ny && phase_at(i, j, k) != phase_at(i, j + 1, k)) e.perimeter += hx * hz * weight(Vec3(0, 1, 0));
        if (k + 1 < nz && phase_at(i, j, k) != phase_at(i, j, k + 1))
          e.perimeter += hx * hy * weight(Vec3(0, 0, 1.0 / eps));
      }
  e.total = e.bulk - e.load + e.perimeter;
  return e;
}

QuadraticSolve quadratic_direct_solve(const LimitProblem& problem, const PhaseField& chi) {
  const auto* w1 = std::get_if<IsotropicQuadratic>(&problem.bulk.phase1);
  const auto* w2 = std::get_if<IsotropicQuadratic>(&problem.bulk.phase2);
  if (!w1 || !w2 || problem.mode == DensityMode::Tabulated)
    throw DomainError("quadratic_direct_solve: both phases must be isotropic-quadratic, untabulated");

  const PlanarMesh& m = problem.mesh;
  const int nx = m.nx(), ny = m.ny();
  const double hx = m.lx() / nx, hy = m.ly() / ny, area = hx * hy;

  // Unknowns: interior nodes (1..nx-1) × (1..ny-1), three components each.
  auto unknown = [&](int i, int j) { return (i <= 0 || j <= 0 || i >= nx || j >= ny) ? -1 : (j - 1) * (nx - 1) + (i - 1); };
  const int count = (nx - 1) * (ny - 1);

  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * count);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double alpha = chi.values[j * nx + i] ? w1->alpha : w2->alpha;
      const int nodes[4] = {unknown(i, j), unknown(i + 1, j), unknown(i, j + 1), unknown(i + 1, j + 1)};
      const double dx[4] = {-0.5 / hx, 0.5 / hx, -0.5 / hx, 0.5 / hx};
      const double dy[4] = {-0.5 / hy, -0.5 / hy, 0.5 / hy, 0.5 / hy};
      // Energy 2 area alpha |G|²: Hessian 4 area alpha (d_a · d_b) per component.
      for (int a = 0; a < 4; ++a) {
        if (nodes[a] < 0) continue;
        for (int b = 0; b < 4; ++b) {
          if (nodes[b] < 0) continue;
          const double h = 4.0 * area * alpha * (dx[a] * dx[b] + dy[a] * dy[b]);
          for (int comp = 0; comp < 3; ++comp) entries.emplace_back(3 * nodes[a] + comp, 3 * nodes[b] + comp, h);
        }
      }
      Vec3 f = Vec3::Zero();
      for (int q = 0; q < 8; ++q) f += kGaussWeights[q] * problem.load((i + 0.5) * hx, (j + 0.5) * hy, kGaussNodes[q]);
      for (int a = 0; a < 4; ++a)
        if (nodes[a] >= 0) rhs.segment<3>(3 * nodes[a]) += 0.25 * area * f;
    }

  Eigen::SparseMatrix<double> H(3 * count, 3 * count);
  H.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(H);
  if (solver.info() != Eigen::Success) throw SolverError("quadratic_direct_solve: factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);

  QuadraticSolve out;
  out.u = Displacement::Zero(3 * m.node_count());
  for (int j = 1; j < ny; ++j)
    for (int i = 1; i < nx; ++i) out.u.segment<3>(3 * (j * (nx + 1) + i)) = x.segment<3>(3 * unknown(i, j));

  double perimeter = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      if (chi.values[j * nx + i] != chi.values[j * nx + i + 1])
        perimeter += 2.0 * hy * planar_normal_weight(problem, Vec2(1.0, 0.0));
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (chi.values[j * nx + i] != chi.values[(j + 1) * nx + i])
        perimeter += 2.0 * hx * planar_normal_weight(problem, Vec2(0.0, 1.0));
  // At the minimizer the quadratic part equals -½ rhs·x.
  out.energy = -0.5 * rhs.dot(x) + perimeter;
  return out;
}

ExhaustiveOptimum exhaustive_quadratic_optimum(const LimitProblem& problem, double target_fraction) {
  const int n = problem.mesh.cell_count();
  if (n > 20) throw DomainError("exhaustive oracle limited to 20 cells");
  const int k = static_cast<int>(std::lround(target_fraction * n));
  ExhaustiveOptimum best;
  best.energy = std::numeric_limits<double>::infinity();
  PhaseField chi;
  chi.values.assign(n, 0);

  // Recursive choice of the phase-1 cells.
  auto visit = [&](auto&& self, int next, int remaining) -> void {
    if (remaining == 0) {
      const QuadraticSolve s = quadratic_direct_solve(problem, chi);
      ++best.layouts;
      if (s.energy < best.energy) {
        best.energy = s.energy;
        best.chi = chi;
      }
      return;
    }
    for (int c = next; c <= n - remaining; ++c) {
      chi.values[c] = 1;
      self(self, c + 1, remaining - 1);
      chi.values[c] = 0;
    }
  };
  visit(visit, 0, k);
  return best;
}

double reduced_surface_by_grid(const SurfaceDensitySpec& spec, const Vec2& eta, double step) {
  const double bound = spec.comparability * spec.comparability * eta.norm();
  auto psi = [&](double xi) { return spec(Vec3(eta.x(), eta.y(), xi)); };
  if (bound == 0.0) return psi(0.0);
  const long count = static_cast<long>(std::ceil(2.0 * bound / step));
  double best = psi(0.0), best_xi = 0.0;
  for (long i = 0; i <= count; ++i) {
    const double xi = -bound + i * step;
    const double v = psi(xi);
    if (v < best) {
      best = v;
      best_xi = xi;
    }
  }
  double lo = best_xi - step, hi = best_xi + step;
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (psi(a) <= psi(b)) hi = b;
    else lo = a;
  }
  return std::min(best, psi(0.5 * (lo + hi)));
}

double homogeneous_hull(const std::vector<double>& angles, const std::vector<double>& values, const Vec2& v) {
  const std::size_t m = angles.size();
  const double norm = v.norm();
  if (norm == 0.0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Vec2> e(m);
  for (std::size_t i = 0; i < m; ++i) e[i] = Vec2(std::cos(angles[i]), std::sin(angles[i]));
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(e[i].x() * v.y() - e[i].y() * v.x()) <= 1e-14 * norm && e[i].dot(v) > 0)
      best = std::min(best, norm * values[i]);
    for (std::size_t j = i + 1; j < m; ++j) {
      const double det = e[i].x() * e[j].y() - e[i].y() * e[j].x();
      if (std::abs(det) < 1e-12) continue;
      const double a = (v.x() * e[j].y() - v.y() * e[j].x()) / det;
      const double b = (e[i].x() * v.y() - e[i].y() * v.x()) / det;
      if (a < 0 || b < 0) continue;
      best = std::min(best, a * values[i] + b * values[j]);
    }
  }
  return best;
}

MembraneReduction reduce_by_grid(const DensityKind& kind, const MembraneGradient& Fbar, double step) {
  auto W = [&](const Vec3& c) { return density_value(kind, compose(Fbar, c)); };
  const int count = static_cast<int>(std::lround(4.0 / step));
  MembraneReduction best;
  best.value = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= count; ++i)
    for (int j = 0; j <= count; ++j)
      for (int k = 0; k <= count; ++k) {
        const Vec3 c(-2.0 + i * step, -2.0 + j * step, -2.0 + k * step);
        const double v = W(c);
        if (v < best.value) {
          best.value = v;
          best.argmin = c;
        }
      }
  double h = step;
  while (h > 1e-12) {
    bool moved = false;
    for (int axis = 0; axis < 3; ++axis)
      for (double sign : {1.0, -1.0}) {
        Vec3 c = best.argmin;
        c[axis] += sign * h;
        const double v = W(c);
        if (v < best.value) {
          best.value = v;
          best.argmin = c;
          moved = true;
        }
      }
    if (!moved) h *= 0.5;
  }
  return best;
}

}  // namespace thinfilm::oracle
