#include "thinfilm/envelope.hpp"

#include "thinfilm/minimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace thinfilm {

namespace {

std::vector<Vec3> lattice_directions(bool half_space) {
  std::vector<Vec3> dirs;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        if (half_space) {
          const int first = i != 0 ? i : (j != 0 ? j : k);
          if (first < 0) continue;
        }
        dirs.push_back(Vec3(i, j, k).normalized());
      }
  return dirs;
}

std::vector<Vec2> half_circle(int count) {
  std::vector<Vec2> dirs;
  for (int k = 0; k < count; ++k) {
    const double angle = std::numbers::pi * k / count;
    dirs.emplace_back(std::cos(angle), std::sin(angle));
  }
  return dirs;
}

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

double laminate_value(const MembraneFunction& R, const MembraneGradient& F, double lambda, const Vec3& a,
                      const Vec2& b, double t, double base) {
  if (lambda <= 0.0 || lambda >= 1.0) return base;
  const MembraneGradient ab = t * a * b.transpose();
  return lambda * R(F + (1.0 - lambda) * ab) + (1.0 - lambda) * R(F - lambda * ab);
}

// Pattern search over (λ, log2 t, polar/azimuth of a, angle of b).
void refine_laminate(const MembraneFunction& R, const MembraneGradient& F, double base, int budget,
                     LaminateResult& best) {
  std::array<double, 5> p{best.fraction, std::log2(best.amplitude), std::acos(std::clamp(best.a.z(), -1.0, 1.0)),
                          std::atan2(best.a.y(), best.a.x()), std::atan2(best.b.y(), best.b.x())};
  std::array<double, 5> step{1.0 / 32, 0.25, std::numbers::pi / 32, std::numbers::pi / 32, std::numbers::pi / 32};

  auto unpack = [](const std::array<double, 5>& q, double& lambda, Vec3& a, Vec2& b, double& t) {
    lambda = std::clamp(q[0], 0.0, 1.0);
    t = std::exp2(q[1]);
    a = Vec3(std::sin(q[2]) * std::cos(q[3]), std::sin(q[2]) * std::sin(q[3]), std::cos(q[2]));
    b = Vec2(std::cos(q[4]), std::sin(q[4]));
  };

  int evals = 0;
  while (evals < budget && step[0] > 1e-9) {
    bool improved = false;
    for (int d = 0; d < 5 && evals < budget; ++d) {
      for (double sign : {1.0, -1.0}) {
        std::array<double, 5> q = p;
        q[d] += sign * step[d];
        double lambda, t;
        Vec3 a;
        Vec2 b;
        unpack(q, lambda, a, b, t);
        const double v = laminate_value(R, F, lambda, a, b, t, base);
        ++evals;
        if (v < best.value) {
          best.value = v;
          best.fraction = lambda;
          best.a = a;
          best.b = b;
          best.amplitude = t;
          p = q;
          p[0] = lambda;
          improved = true;
          break;
        }
      }
    }
    if (!improved)
      for (double& s : step) s *= 0.5;
  }
}

}  // namespace

LaminationGrid LaminationGrid::standard() {
  LaminationGrid g;
  for (int k = 0; k <= 16; ++k) g.fractions.push_back(k / 16.0);
  g.a_directions = lattice_directions(false);
  g.b_directions = half_circle(16);
  g.amplitudes = powers_of_two(-4, 3);
  g.refine_evaluations = 300;
  return g;
}

LaminationGrid LaminationGrid::inner() {
  LaminationGrid g;
  g.fractions = {0.25, 0.5, 0.75};
  g.a_directions = lattice_directions(true);
  g.b_directions = half_circle(8);
  g.amplitudes = powers_of_two(-3, 2);
  g.refine_evaluations = 0;
  return g;
}

LaminationGrid LaminationGrid::outer() {
  LaminationGrid g;
  g.fractions = {0.25, 0.5, 0.75};
  g.a_directions = lattice_directions(true);
  g.b_directions = half_circle(8);
  g.amplitudes = powers_of_two(-2, 2);
  g.refine_evaluations = 40;
  return g;
}

LaminateResult laminate_search(const MembraneFunction& R, const MembraneGradient& F, const LaminationGrid& grid) {
  const double base = R(F);
  LaminateResult best;
  best.value = base;
  best.amplitude = grid.amplitudes.empty() ? 1.0 : grid.amplitudes.front();
  for (double lambda : grid.fractions) {
    if (lambda <= 0.0 || lambda >= 1.0) continue;
    for (const Vec3& a : grid.a_directions)
      for (const Vec2& b : grid.b_directions)
        for (double t : grid.amplitudes) {
          const double v = laminate_value(R, F, lambda, a, b, t, base);
          if (v < best.value) {
            best.value = v;
            best.fraction = lambda;
            best.a = a;
            best.b = b;
            best.amplitude = t;
          }
        }
  }
  if (grid.refine_evaluations > 0 && best.fraction > 0.0 && best.value > 0.0)
    refine_laminate(R, F, base, grid.refine_evaluations, best);
  return best;
}

LaminateResult laminate_upper_detail(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar,
                                     int depth) {
  if (depth != 1 && depth != 2) throw DomainError("laminate_upper: depth must be 1 or 2");
  if (!Fbar.allFinite()) throw DomainError("laminate_upper: non-finite membrane gradient");
  const MembraneFunction base = [&](const MembraneGradient& G) { return eval_membrane(spec, phase, G); };

  LaminateResult first = laminate_search(base, Fbar, LaminationGrid::standard());
  first.depth = 1;
  // Densities are non-negative: a zero depth-1 value cannot be improved.
  if (depth == 1 || first.value <= 0.0) return first;

  const LaminationGrid inner_grid = LaminationGrid::inner();
  const MembraneFunction depth_one = [&](const MembraneGradient& G) {
    return laminate_search(base, G, inner_grid).value;
  };
  LaminateResult second = laminate_search(depth_one, Fbar, LaminationGrid::outer());
  second.depth = 2;
  return second.value < first.value ? second : first;
}

double laminate_upper(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar, int depth) {
  return laminate_upper_detail(spec, phase, Fbar, depth).value;
}

// ---------------------------------------------------------------------------
// Cell problem

namespace {

struct CellGrid {
  int n;
  double h;
  int interior(int i, int j) const {
    if (i <= 0 || j <= 0 || i >= n || j >= n) return -1;
    return (j - 1) * (n - 1) + (i - 1);
  }
  int unknowns() const { return 3 * (n - 1) * (n - 1); }
};

double cell_energy(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& F, const CellGrid& grid,
                   const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  auto node = [&](int i, int j) -> Vec3 {
    const int k = grid.interior(i, j);
    return k < 0 ? Vec3::Zero() : Vec3(x.segment<3>(3 * k));
  };
  auto scatter = [&](int i, int j, const Vec3& v) {
    const int k = grid.interior(i, j);
    if (k >= 0) grad->segment<3>(3 * k) += v;
  };
  if (grad) grad->setZero(x.size());

  const double weight = 0.5 * grid.h * grid.h;
  const double inv_h = 1.0 / grid.h;
  double energy = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    for (int i = 0; i < grid.n; ++i) {
      const Vec3 p00 = node(i, j), p10 = node(i + 1, j), p11 = node(i + 1, j + 1), p01 = node(i, j + 1);
      // Lower triangle (i,j)-(i+1,j)-(i+1,j+1), upper triangle (i,j)-(i+1,j+1)-(i,j+1).
      for (int tri = 0; tri < 2; ++tri) {
        MembraneGradient G = F;
        if (tri == 0) {
          G.col(0) += (p10 - p00) * inv_h;
          G.col(1) += (p11 - p10) * inv_h;
        } else {
          G.col(0) += (p11 - p01) * inv_h;
          G.col(1) += (p01 - p00) * inv_h;
        }
        if (!grad) {
          energy += weight * eval_membrane(spec, phase, G);
          continue;
        }
        const MembraneValueGradient vg = membrane_value_gradient(spec, phase, G);
        energy += weight * vg.value;
        const Vec3 dx = weight * inv_h * vg.gradient.col(0);
        const Vec3 dy = weight * inv_h * vg.gradient.col(1);
        if (tri == 0) {
          scatter(i + 1, j, dx);
          scatter(i, j, -dx);
          scatter(i + 1, j + 1, dy);
          scatter(i + 1, j, -dy);
        } else {
          scatter(i + 1, j + 1, dx);
          scatter(i, j + 1, -dx);
          scatter(i, j + 1, dy);
          scatter(i, j, -dy);
        }
      }
    }
  }
  return energy;
}

Eigen::VectorXd prolongate(const Eigen::VectorXd& coarse, int coarse_n) {
  const CellGrid c{coarse_n, 1.0 / coarse_n};
  const CellGrid f{2 * coarse_n, 0.5 / coarse_n};
  auto cval = [&](int i, int j) -> Vec3 {
    const int k = c.interior(i, j);
    return k < 0 ? Vec3::Zero() : Vec3(coarse.segment<3>(3 * k));
  };
  Eigen::VectorXd fine(f.unknowns());
  for (int j = 1; j < f.n; ++j) {
    for (int i = 1; i < f.n; ++i) {
      const int I = i / 2, J = j / 2;
      Vec3 v;
      if (i % 2 == 0 && j % 2 == 0) v = cval(I, J);
      else if (j % 2 == 0) v = 0.5 * (cval(I, J) + cval(I + 1, J));
      else if (i % 2 == 0) v = 0.5 * (cval(I, J) + cval(I, J + 1));
      else v = 0.5 * (cval(I, J) + cval(I + 1, J + 1));  // on the shared diagonal
      fine.segment<3>(3 * f.interior(i, j)) = v;
    }
  }
  return fine;
}

}  // namespace

double cell_problem_energy(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar, int n,
                           const Eigen::VectorXd& interior) {
  const CellGrid grid{n, 1.0 / n};
  if (interior.size() != grid.unknowns()) throw DomainError("cell_problem_energy: wrong number of nodal values");
  return cell_energy(spec, phase, Fbar, grid, interior, nullptr);
}

CellProblemResult cell_problem_upper_detail(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar,
                                            int n, const CellProblemOptions& options) {
  if (n < 1) throw DomainError("cell_problem_upper: N must be >= 1");
  if (!Fbar.allFinite()) throw DomainError("cell_problem_upper: non-finite membrane gradient");

  CellProblemResult result;
  result.cells = n;
  result.value = eval_membrane(spec, phase, Fbar);
  if (n == 1) return result;

  const CellGrid grid{n, 1.0 / n};
  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    return cell_energy(spec, phase, Fbar, grid, x, &g);
  };
  MinimizeOptions mopts;
  mopts.grad_tol = options.grad_tol;
  mopts.max_iter = options.max_iter;

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(grid.unknowns()));
  if (options.warm_start_from_coarse && n % 2 == 0 && n / 2 >= 2) {
    const CellProblemResult coarse = cell_problem_upper_detail(spec, phase, Fbar, n / 2, options);
    starts.push_back(prolongate(coarse.interior, n / 2));
  }

  // Sawtooth start shaped after the best first-order laminate.
  const LaminateResult lam = laminate_upper_detail(spec, phase, Fbar, 1);
  if (lam.fraction > 0.0 && lam.fraction < 1.0) {
    Eigen::VectorXd saw(grid.unknowns());
    const double period = std::max(2.0 / n, 0.5);
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) {
        const double y = Vec2(i * grid.h, j * grid.h).dot(lam.b) / period;
        const double frac = y - std::floor(y);
        const double profile =
            frac < lam.fraction ? (1.0 - lam.fraction) * frac : lam.fraction * (1.0 - frac);
        saw.segment<3>(3 * grid.interior(i, j)) = lam.amplitude * period * profile * lam.a;
      }
    starts.push_back(std::move(saw));
  }

  SplitMix64 rng(options.seed + static_cast<std::uint64_t>(n));
  const double amplitude = grid.h * (1.0 + Fbar.norm());
  for (int r = 0; r < options.random_starts; ++r) {
    Eigen::VectorXd x(grid.unknowns());
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = amplitude * rng.normal();
    starts.push_back(std::move(x));
  }

  result.interior = Eigen::VectorXd::Zero(grid.unknowns());
  for (const Eigen::VectorXd& start : starts) {
    const MinimizeResult run = lbfgs(objective, start, mopts);
    const bool converged = run.status == MinimizeStatus::Converged;
    // Round-off level improvements do not displace a converged minimizer.
    const double noise = 1e-12 * std::max(1.0, std::abs(result.value));
    if (run.value < result.value - noise || (run.value < result.value && !result.certified)) {
      result.value = run.value;
      result.interior = run.x;
      result.certified = converged;
    } else if (converged && run.value <= result.value + noise) {
      result.certified = true;
    }
  }
  return result;
}

double cell_problem_upper(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar, int n) {
  return cell_problem_upper_detail(spec, phase, Fbar, n).value;
}

// ---------------------------------------------------------------------------
// Slice envelopes

void Slice::validate() const {
  const double tol = 1e-9;
  if (!origin.allFinite() || !dir1.allFinite() || !dir2.allFinite())
    throw DomainError("slice: non-finite definition");
  if (std::abs(frob_dot(dir1, dir1) - 1.0) > tol || std::abs(frob_dot(dir2, dir2) - 1.0) > tol ||
      std::abs(frob_dot(dir1, dir2)) > tol)
    throw DomainError("slice: directions must be Frobenius-orthonormal");
  if (!(s_max > s_min) || !(t_max > t_min)) throw DomainError("slice: empty coordinate box");
}

std::vector<double> grid_convex_envelope(const std::vector<double>& s, const std::vector<double>& t,
                                         const std::vector<double>& values) {
  const std::size_t ns = s.size(), nt = t.size(), n = ns * nt;
  if (values.size() != n || ns < 2 || nt < 2) throw DomainError("grid_convex_envelope: bad grid");
  auto xs = [&](std::size_t k) { return s[k % ns]; };
  auto ts = [&](std::size_t k) { return t[k / ns]; };

  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * scale;

  std::vector<double> out(n);
  const std::array<std::size_t, 4> corners{0, ns - 1, n - ns, n - 1};

  for (std::size_t q = 0; q < n; ++q) {
    const double qx = xs(q), qy = ts(q);
    std::vector<std::size_t> active(corners.begin(), corners.end());
    if (std::find(active.begin(), active.end(), q) == active.end()) active.push_back(q);

    double value = values[q];
    for (int round = 0; round < 200; ++round) {
      // Primal over the active set: cheapest triangle containing q.
      struct Candidate {
        double value;
        double a, bx, by;  // plane z = a + bx*x + by*y
      };
      double best = std::numeric_limits<double>::infinity();
      std::vector<Candidate> candidates;
      const std::size_t m = active.size();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
          for (std::size_t k = j + 1; k < m; ++k) {
            const std::size_t A = active[i], B = active[j], C = active[k];
            const double x1 = xs(A), y1 = ts(A), x2 = xs(B), y2 = ts(B), x3 = xs(C), y3 = ts(C);
            const double det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
            const double span = std::max({std::abs(x2 - x1), std::abs(x3 - x1), std::abs(y2 - y1), std::abs(y3 - y1)});
            if (std::abs(det) <= 1e-14 * span * span) continue;
            const double l2 = ((qx - x1) * (y3 - y1) - (x3 - x1) * (qy - y1)) / det;
            const double l3 = ((x2 - x1) * (qy - y1) - (qx - x1) * (y2 - y1)) / det;
            const double l1 = 1.0 - l2 - l3;
            if (l1 < -1e-12 || l2 < -1e-12 || l3 < -1e-12) continue;
            const double v = l1 * values[A] + l2 * values[B] + l3 * values[C];
            // Plane through the three lifted points.
            const double dz2 = values[B] - values[A], dz3 = values[C] - values[A];
            const double bx = (dz2 * (y3 - y1) - dz3 * (y2 - y1)) / det;
            const double by = ((x2 - x1) * dz3 - (x3 - x1) * dz2) / det;
            candidates.push_back({v, values[A] - bx * x1 - by * y1, bx, by});
            best = std::min(best, v);
          }
      value = std::min(values[q], best);

      // Dual plane: an optimal triangle whose plane stays below the active set.
      const Candidate* plane = nullptr;
      for (const Candidate& c : candidates) {
        if (c.value > best + tol) continue;
        bool feasible = true;
        for (std::size_t idx : active)
          if (c.a + c.bx * xs(idx) + c.by * ts(idx) > values[idx] + tol) {
            feasible = false;
            break;
          }
        if (feasible) {
          plane = &c;
          break;
        }
      }
      if (!plane) break;

      // Most violated constraints over the whole grid.
      std::vector<std::pair<double, std::size_t>> violated;
      for (std::size_t k = 0; k < n; ++k) {
        const double excess = plane->a + plane->bx * xs(k) + plane->by * ts(k) - values[k];
        if (excess > tol) violated.emplace_back(excess, k);
      }
      if (violated.empty()) break;
      std::partial_sort(violated.begin(), violated.begin() + std::min<std::size_t>(3, violated.size()),
                        violated.end(), std::greater<>());
      bool added = false;
      for (std::size_t r = 0; r < std::min<std::size_t>(3, violated.size()); ++r) {
        const std::size_t k = violated[r].second;
        if (std::find(active.begin(), active.end(), k) == active.end()) {
          active.push_back(k);
          added = true;
        }
      }
      if (!added) break;
    }
    out[q] = value;
  }
  return out;
}

std::vector<EnvelopeEstimate> envelope_slice(const BulkDensitySpec& spec, Phase phase, const Slice& slice, int grid,
                                             const EnvelopeSliceOptions& options) {
  slice.validate();
  if (grid < 2 || grid > 257) throw DomainError("envelope_slice: grid resolution must lie in [2, 257]");

  std::vector<double> s(grid), t(grid);
  for (int i = 0; i < grid; ++i) {
    s[i] = slice.s_at(i, grid);
    t[i] = slice.t_at(i, grid);
  }

  std::vector<EnvelopeEstimate> table(static_cast<std::size_t>(grid) * grid);
  std::vector<double> raw(table.size());
  for (int j = 0; j < grid; ++j)
    for (int i = 0; i < grid; ++i) {
      EnvelopeEstimate& e = table[j * grid + i];
      e.s = s[i];
      e.t = t[j];
      e.point = slice.at(s[i], t[j]);
      e.raw = raw[j * grid + i] = eval_membrane(spec, phase, e.point);
    }
  const std::vector<double> lower = grid_convex_envelope(s, t, raw);

  for (std::size_t k = 0; k < table.size(); ++k) {
    EnvelopeEstimate& e = table[k];
    const LaminateResult lam = laminate_upper_detail(spec, phase, e.point, options.laminate_depth);
    const CellProblemResult cell = cell_problem_upper_detail(spec, phase, e.point, options.cell_n);
    if (cell.value < lam.value) {
      e.upper = cell.value;
      e.method_upper = "cell-problem(" + std::to_string(options.cell_n) + ")";
      e.certified = cell.certified;
    } else {
      e.upper = lam.value;
      e.method_upper = "lamination(" + std::to_string(lam.depth) + ")";
    }
    e.upper = std::min(e.upper, e.raw);
    e.lower = lower[k];
    if (e.lower > e.upper) {
      e.lower = e.upper;
      e.lower_capped = true;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// EnvelopeTable

EnvelopeTable::EnvelopeTable(Slice slice, int grid, std::vector<double> phase1, std::vector<double> phase2)
    : slice_(std::move(slice)), grid_(grid), phase1_(std::move(phase1)), phase2_(std::move(phase2)) {
  slice_.validate();
  const std::size_t expected = static_cast<std::size_t>(grid_) * grid_;
  if (grid_ < 2 || phase1_.size() != expected || phase2_.size() != expected)
    throw DomainError("envelope table: value count does not match the grid");
}

EnvelopeTable EnvelopeTable::build(const BulkDensitySpec& spec, const Slice& slice, int grid,
                                   const EnvelopeSliceOptions& options) {
  std::vector<double> upper1, upper2;
  for (const EnvelopeEstimate& e : envelope_slice(spec, Phase::One, slice, grid, options)) upper1.push_back(e.upper);
  for (const EnvelopeEstimate& e : envelope_slice(spec, Phase::Two, slice, grid, options)) upper2.push_back(e.upper);
  return EnvelopeTable(slice, grid, std::move(upper1), std::move(upper2));
}

std::optional<EnvelopeTable::Lookup> EnvelopeTable::lookup(Phase phase, const MembraneGradient& Fbar) const {
  const MembraneGradient d = Fbar - slice_.origin;
  const double s = frob_dot(d, slice_.dir1);
  const double t = frob_dot(d, slice_.dir2);
  const double off_plane = (d - s * slice_.dir1 - t * slice_.dir2).norm();
  if (off_plane > 1e-9 * (1.0 + Fbar.norm())) return std::nullopt;
  const double eps = 1e-12 * (1.0 + std::abs(s) + std::abs(t));
  if (s < slice_.s_min - eps || s > slice_.s_max + eps || t < slice_.t_min - eps || t > slice_.t_max + eps)
    return std::nullopt;

  const double hs = (slice_.s_max - slice_.s_min) / (grid_ - 1);
  const double ht = (slice_.t_max - slice_.t_min) / (grid_ - 1);
  const double fs = std::clamp((s - slice_.s_min) / hs, 0.0, grid_ - 1.0);
  const double ft = std::clamp((t - slice_.t_min) / ht, 0.0, grid_ - 1.0);
  const int i = std::min(static_cast<int>(fs), grid_ - 2);
  const int j = std::min(static_cast<int>(ft), grid_ - 2);
  const double a = fs - i, b = ft - j;

  const std::vector<double>& v = phase == Phase::One ? phase1_ : phase2_;
  const double v00 = v[j * grid_ + i], v10 = v[j * grid_ + i + 1];
  const double v01 = v[(j + 1) * grid_ + i], v11 = v[(j + 1) * grid_ + i + 1];
  Lookup out;
  out.value = (1 - a) * (1 - b) * v00 + a * (1 - b) * v10 + (1 - a) * b * v01 + a * b * v11;
  const double ds = ((1 - b) * (v10 - v00) + b * (v11 - v01)) / hs;
  const double dt = ((1 - a) * (v01 - v00) + a * (v11 - v10)) / ht;
  out.gradient = ds * slice_.dir1 + dt * slice_.dir2;
  return out;
}

}  // namespace thinfilm
