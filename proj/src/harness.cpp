#include "thinfilm/harness.hpp"

#include "thinfilm/field_io.hpp"
#include "thinfilm/oracles.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <cmath>
#include <limits>
#include <numbers>

namespace thinfilm {

namespace {

template <class F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const DomainError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), false);
  }
}

Slice default_slice() {
  Slice s;
  s.dir1(0, 0) = 1.0;
  s.dir2(1, 1) = 1.0;
  return s;
}

std::vector<NamedSlice> slices_of(const ExperimentConfig& config) {
  if (!config.slices.empty()) return config.slices;
  return {{"default", default_slice()}};
}

bool transverse_trivial(const DensityKind& kind) {
  if (std::holds_alternative<IsotropicQuadratic>(kind) || std::holds_alternative<PowerLaw>(kind)) return true;
  if (const auto* s = std::get_if<ShiftedQuadratic>(&kind)) return s->center.col(2).isZero(0.0);
  return false;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

LimitProblem make_limit_problem(const ExperimentConfig& config) {
  LimitProblem problem(PlanarMesh(config.nx, config.ny, config.lx, config.ly));
  problem.bulk = config.bulk;
  problem.load = config.load;
  problem.mode = config.density_mode;
  if (config.surface) problem.surface = convexify_planar(*config.surface, config.surface_directions);
  if (config.density_mode == DensityMode::Tabulated) {
    EnvelopeSliceOptions opts{config.laminate_depth, config.cell_n};
    problem.table = std::make_shared<EnvelopeTable>(
        EnvelopeTable::build(config.bulk, slices_of(config).front().slice, config.envelope_grid, opts));
  }
  problem.validate();
  return problem;
}

SlabProblem make_slab_problem(const ExperimentConfig& config, double epsilon) {
  SlabProblem problem(SlabMesh(PlanarMesh(config.nx, config.ny, config.lx, config.ly), config.layers), epsilon);
  problem.bulk = config.bulk;
  problem.load = config.load;
  problem.surface = config.surface;
  problem.validate();
  return problem;
}

SolveOptions planar_options(const ExperimentConfig& config) {
  SolveOptions o;
  o.target_fraction = config.planar_fraction();
  o.alternations = config.alternations;
  o.seeds = config.planar_seeds();
  o.tol = config.alternation_tol;
  o.u_tol = config.u_tol;
  o.u_max_iter = config.u_max_iter;
  return o;
}

SolveOptions slab_options(const ExperimentConfig& config) {
  SolveOptions o = planar_options(config);
  o.target_fraction = config.lambda;
  o.seeds = config.slab_seeds();
  return o;
}

SurfaceTable surface_table(const SurfaceDensitySpec& spec, int directions) {
  const PlanarSurfaceDensity planar = convexify_planar(spec, directions);
  SurfaceTable table;
  for (int k = 0; k < planar.direction_count(); ++k) {
    const double theta = planar.angles()[k];
    table.push_back({theta, planar.reduced_values()[k], planar(Vec2(std::cos(theta), std::sin(theta)))});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Sweep

Verdict sweep_verdict(const std::vector<double>& gaps, double limit_energy, double slack, double threshold) {
  Verdict v;
  const double floor = 1e-9 * std::max(1.0, std::abs(limit_energy));
  for (std::size_t k = 1; k < gaps.size(); ++k)
    if (gaps[k] > (1.0 + slack) * gaps[k - 1] + floor) v.monotone = false;
  const double last = gaps.empty() ? 0.0 : gaps.back();
  if (std::abs(limit_energy) > 0) v.final_relative_gap = last / std::abs(limit_energy);
  else v.final_relative_gap = last == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  v.passed = v.monotone && v.final_relative_gap <= threshold;
  return v;
}

SweepReport run_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepReport report;
  report.name = config.name;
  report.lambda = config.lambda;
  report.planar_fraction = config.planar_fraction();
  report.convention = config.convention;
  report.anisotropic = config.surface.has_value();
  report.slack = config.slack;
  report.threshold = config.threshold;

  const LimitProblem planar = in_stage("limit problem", [&] { return make_limit_problem(config); });
  const SolveResult limit = in_stage("solve_limit", [&] { return solve_limit(planar, planar_options(config)); });
  report.limit = limit.energy;
  report.limit_restarts = limit.restarts;
  report.limit_exhaustive = limit.exhaustive;
  report.limit_state = limit.state;

  const SlabMesh slab(PlanarMesh(config.nx, config.ny, config.lx, config.ly), config.layers);
  const DesignState flat = extrude(slab, limit.state);
  const bool same_fraction = config.convention == Convention::Lambda;

  for (std::size_t k = 0; k < config.epsilons.size(); ++k) {
    const double eps = config.epsilons[k];
    const std::string stage = "minimize_eps(eps=" + std::to_string(eps) + ")";
    SweepEntry entry = in_stage(stage, [&] {
      const SlabProblem problem = make_slab_problem(config, eps);
      SolveOptions opts = slab_options(config);
      if (k > 0) opts.warm_starts.push_back(report.entries.back().state);
      // The extruded limit state only satisfies the slab constraint when the
      // planar fraction equals λ.
      if (same_fraction) opts.warm_starts.push_back(flat);
      if (opts.warm_starts.empty() && opts.seeds.empty()) opts.seeds = {config.seed + 1000};
      const SlabSolveResult r = minimize_eps(problem, opts);
      SweepEntry e;
      e.epsilon = eps;
      e.energy = r.solve.energy;
      e.diagnostics = r.diagnostics;
      e.restarts = r.solve.restarts;
      e.state = r.solve.state;
      return e;
    });
    report.entries.push_back(std::move(entry));
  }

  // Backward pass: the ε_{k+1} minimizer is admissible at ε_k with no larger energy.
  for (std::size_t k = report.entries.size(); k-- > 1;) {
    SweepEntry& coarse = report.entries[k - 1];
    const SweepEntry& fine = report.entries[k];
    in_stage("polish(eps=" + std::to_string(coarse.epsilon) + ")", [&] {
      const SlabProblem problem = make_slab_problem(config, coarse.epsilon);
      SolveOptions opts = slab_options(config);
      opts.seeds.clear();
      opts.warm_starts = {fine.state};
      const SlabSolveResult r = minimize_eps(problem, opts);
      if (r.solve.energy.total < coarse.energy.total) {
        coarse.energy = r.solve.energy;
        coarse.diagnostics = r.diagnostics;
        coarse.state = r.solve.state;
        coarse.polished = true;
      }
      for (RestartRecord rec : r.solve.restarts) {
        rec.label = "polish:" + rec.label;
        coarse.restarts.push_back(rec);
      }
      return 0;
    });
  }

  std::vector<double> gaps;
  for (SweepEntry& e : report.entries) {
    e.gap = std::abs(e.energy.total - report.limit.total);
    e.relative_gap = std::abs(report.limit.total) > 0 ? e.gap / std::abs(report.limit.total)
                                                      : (e.gap == 0 ? 0.0 : std::numeric_limits<double>::infinity());
    gaps.push_back(e.gap);
  }
  report.verdict = sweep_verdict(gaps, report.limit.total, config.slack, config.threshold);
  if (config.surface) report.surface = surface_table(*config.surface, config.surface_directions);
  return report;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::passed() const {
  for (const Check& c : checks)
    if (!c.passed) return false;
  return true;
}

namespace {

void add(ValidationReport& report, Check check) { report.checks.push_back(std::move(check)); }

template <class F>
void guarded(ValidationReport& report, const std::string& name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    add(report, {name, false, 0.0, 0.0, std::string("exception: ") + e.what()});
  }
}

Displacement random_clamped(SplitMix64& rng, int nodes, const std::function<bool(int)>& clamped, double scale) {
  Displacement u = Displacement::Zero(3 * nodes);
  for (int n = 0; n < nodes; ++n)
    if (!clamped(n))
      for (int k = 0; k < 3; ++k) u[3 * n + k] = scale * rng.uniform(-1.0, 1.0);
  return u;
}

PhaseField random_layout(SplitMix64& rng, int cells) {
  PhaseField chi;
  for (int c = 0; c < cells; ++c) chi.values.push_back(static_cast<std::uint8_t>(rng.below(2)));
  return chi;
}

void check_growth(ValidationReport& report, const ExperimentConfig& config) {
  const GrowthReport g = validate_growth(config.bulk, config.samples, config.radius, config.seed);
  std::string detail = std::to_string(g.checks) + " inequalities on " + std::to_string(g.samples) +
                       " samples, worst " + g.worst_check;
  if (g.witness) detail += "; first violation " + g.witness->check + "/" + g.witness->phase;
  add(report, {"growth-sandwich", g.passed, g.worst_margin, -1e-12, detail});
}

void check_envelope(ValidationReport& report, const ExperimentConfig& config) {
  const GrowthCertificate& g = config.bulk.growth;
  SplitMix64 rng(config.seed + 17);
  double worst = 0.0;
  std::string where;
  auto need = [&](double slack_value, const std::string& what) {
    if (slack_value < worst) {
      worst = slack_value;
      where = what;
    }
  };
  for (int n = 0; n < 4; ++n) {
    const MembraneGradient F = sample_ball<3, 2>(rng, 1.0);
    for (Phase phase : {Phase::One, Phase::Two}) {
      const double raw = eval_membrane(config.bulk, phase, F);
      const double lam1 = laminate_upper(config.bulk, phase, F, 1);
      const double lam2 = laminate_upper(config.bulk, phase, F, 2);
      const double cell2 = cell_problem_upper(config.bulk, phase, F, 2);
      const double cell4 = cell_problem_upper(config.bulk, phase, F, 4);
      const double lower = g.beta_lower * (std::pow(F.norm(), g.p) - 1.0);
      need(raw + 1e-9 - lam1, "laminate(1) <= raw");
      need(lam1 + 1e-9 - lam2, "laminate(2) <= laminate(1)");
      need(raw + 1e-9 - cell2, "cell(2) <= raw");
      need(cell2 + 1e-9 - cell4, "cell(4) <= cell(2)");
      need(std::min(lam2, cell4) + 1e-9 - lower, "upper >= growth lower bound");
    }
  }
  add(report, {"envelope-ordering", worst >= 0.0, worst, 0.0, where.empty() ? "all orderings hold" : where});

  // Envelope-level Lipschitz bound with the constant 2β implied by the growth bounds.
  const LaminationGrid grid = LaminationGrid::inner();
  const double c_est = 2.0 * g.beta_upper;
  double max_ratio = 0.0, worst_growth = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (std::size_t n = 0; n < config.samples; ++n) {
    const MembraneGradient F = sample_ball<3, 2>(rng, config.radius);
    const double fp = std::pow(F.norm(), g.p);
    double upper[2];
    for (Phase phase : {Phase::One, Phase::Two}) {
      const MembraneFunction base = [&](const MembraneGradient& G) { return eval_membrane(config.bulk, phase, G); };
      upper[phase == Phase::One ? 0 : 1] = laminate_search(base, F, grid).value;
    }
    const double ratio = std::abs(upper[0] - upper[1]) / (1.0 + fp);
    max_ratio = std::max(max_ratio, ratio);
    if (ratio > c_est * (1.0 + 1e-12)) ++violations;
    for (double u : upper) {
      const double margin = (u - g.beta_lower * (fp - 1.0)) / (g.beta_upper * (1.0 + fp));
      worst_growth = std::min(worst_growth, margin);
      if (margin < -1e-12) ++violations;
    }
  }
  add(report, {"envelope-lipschitz", violations == 0, max_ratio, c_est,
               "C_est = 2 beta; empirical max |upper1 - upper2| / (1 + |F|^p) = " + std::to_string(max_ratio) +
                   "; worst normalized growth margin " + std::to_string(worst_growth)});
}

void check_surface(ValidationReport& report, const ExperimentConfig& config) {
  const SurfaceDensitySpec spec = config.surface ? *config.surface : SurfaceDensitySpec::make(EuclideanSurface{});
  const double C = spec.comparability;
  SplitMix64 rng(config.seed + 29);

  std::size_t bad_growth = 0;
  double worst_psi = 0.0;
  for (std::size_t n = 0; n < config.samples; ++n) {
    const Vec3 nu(rng.normal(), rng.normal(), rng.normal());
    const double r = nu.norm(), psi = spec(nu);
    const double t = rng.uniform(0.1, 10.0);
    const double low = psi - r / C, high = C * r - psi;
    const double even = std::abs(spec(-nu) - psi);
    const double homog = std::abs(spec(t * nu) - t * psi);
    const double tol = 1e-12 * std::max(1.0, t) * (1.0 + C * r);
    if (low < -tol || high < -tol || even > tol || homog > tol) ++bad_growth;
    worst_psi = std::min({worst_psi, low, high});
  }
  add(report, {"surface-growth", bad_growth == 0, worst_psi, 0.0,
               surface_kind_name(spec.kind) + ": (1/C)|v| <= Psi <= C|v|, evenness, 1-homogeneity"});

  const PlanarSurfaceDensity planar = convexify_planar(spec, config.surface_directions);
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t n = 0; n < config.samples; ++n) {
    const Vec2 a(rng.normal(), rng.normal()), b(rng.normal(), rng.normal());
    const double t = rng.uniform(0.1, 10.0);
    const double pa = planar(a), pb = planar(b);
    const double scale = 1.0 + C * (a.norm() + b.norm());
    const double tol = 1e-12 * scale * std::max(1.0, t);
    const double even = std::abs(planar(-a) - pa);
    const double homog = std::abs(planar(t * a) - t * pa);
    const double mid = planar(0.5 * (a + b)) - 0.5 * (pa + pb);
    // Ψ̄** <= Ψ̄ holds exactly at the sampled directions; in between the
    // polygonal envelope may exceed Ψ̄ by the angular discretization.
    const int k = static_cast<int>(rng.below(planar.direction_count()));
    const double th = planar.angles()[k];
    const double above = planar(t * Vec2(std::cos(th), std::sin(th))) - t * planar.reduced_values()[k];
    const double below = a.norm() / C - pa;
    if (even > tol || homog > tol || mid > 1e-9 * scale || above > 1e-9 * scale || below > 1e-9 * scale) ++bad;
    worst = std::max({worst, even, homog, mid, above, below});
  }
  add(report, {"planar-envelope-properties", bad == 0, worst, 1e-9,
               "evenness, 1-homogeneity, midpoint convexity, (1/C)|v| <= Psi**, Psi** <= Psibar at samples"});

  // Hull oracle on an independently reduced sample set.
  std::vector<double> angles, values;
  const int m = config.surface_directions;
  for (int k = 0; k < m; ++k) {
    const double th = 2.0 * std::numbers::pi * k / m;
    angles.push_back(th);
    values.push_back(oracle::reduced_surface_by_grid(spec, Vec2(std::cos(th), std::sin(th)), 1e-3));
  }
  double dev = 0.0;
  for (int k = 0; k < 360; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 360;
    const Vec2 e(std::cos(th), std::sin(th));
    dev = std::max(dev, std::abs(planar(e) - oracle::homogeneous_hull(angles, values, e)));
  }
  add(report, {"planar-envelope-hull-oracle", dev <= 1e-5, dev, 1e-5, "360 directions"});
}

void check_roundtrip(ValidationReport& report, const ExperimentConfig& config) {
  const SlabMesh mesh(PlanarMesh(4, 3, config.lx, config.ly), 4);
  SplitMix64 rng(config.seed + 41);
  const PhaseField chi = random_layout(rng, mesh.cell_count());

  VectorPolynomial affine;
  affine.terms = {{Vec3(0.3, -0.2, 0.1), {0, 0, 0}}, {Vec3(1.0, 0.5, -0.25), {1, 0, 0}},
                  {Vec3(-0.4, 0.2, 0.7), {0, 1, 0}}, {Vec3(0.6, -0.3, 1.1), {0, 0, 1}}};
  VectorPolynomial quadratic;
  quadratic.terms = {{Vec3(0.0, 0.0, 1.0), {0, 0, 2}}};

  const RoundtripReport a = rescale_roundtrip_check(affine, 0.5, config.bulk.phase1, mesh, chi);
  const RoundtripReport q = rescale_roundtrip_check(quadratic, 0.25, config.bulk.phase1, mesh, chi);
  const double ea = relative(a.physical, a.rescaled), eq = relative(q.physical, q.rescaled);
  add(report, {"rescale-affine", ea <= 1e-12, ea, 1e-12, "v affine, eps = 1/2"});
  add(report, {"rescale-quadratic", eq <= 1e-10, eq, 1e-10, "v = (0, 0, x3^2), eps = 1/4"});
  const double ep = relative(a.perimeter_physical, a.perimeter_rescaled);
  add(report, {"rescale-perimeter", ep <= 1e-12, ep, 1e-12, "random slab layout"});
}

void check_assembly(ValidationReport& report, const ExperimentConfig& config) {
  SplitMix64 rng(config.seed + 53);
  const LimitProblem planar = make_limit_problem(config);
  const PhaseField chi2 = random_layout(rng, planar.mesh.cell_count());
  const Displacement u2 = random_clamped(
      rng, planar.mesh.node_count(), [&](int n) { return planar.mesh.boundary_node(n); }, 0.5);
  const double e2 = relative(energy_2d(planar, chi2, u2).total, oracle::naive_energy_2d(planar, chi2, u2).total);
  add(report, {"double-assembly-2d", e2 <= 1e-12, e2, 1e-12, "random planar state"});

  const SlabProblem slab = make_slab_problem(config, config.epsilons.back());
  const PhaseField chi3 = random_layout(rng, slab.mesh.cell_count());
  const Displacement u3 = random_clamped(
      rng, slab.mesh.node_count(), [&](int n) { return slab.mesh.lateral_boundary_node(n); }, 0.5);
  const double e3 = relative(energy_3d(slab, chi3, u3).total, oracle::naive_energy_3d(slab, chi3, u3).total);
  add(report, {"double-assembly-3d", e3 <= 1e-12, e3, 1e-12, "random slab state"});

  // x3-independent states carry the same energy on both sides.
  if (!(transverse_trivial(config.bulk.phase1) && transverse_trivial(config.bulk.phase2)) ||
      !config.load.transverse_uniform() || (config.surface && !config.surface->monotone_in_transverse())) {
    add(report, {"slab-planar-consistency", true, 0.0, 1e-12, "not applicable to this configuration"});
    return;
  }
  double worst = 0.0;
  for (double eps : config.epsilons) {
    const SlabProblem p = make_slab_problem(config, eps);
    const DesignState s = extrude(p.mesh, {chi2, u2});
    worst = std::max(worst, relative(energy_3d(p, s.chi, s.u).total, energy_2d(planar, chi2, u2).total));
  }
  add(report, {"slab-planar-consistency", worst <= 1e-12, worst, 1e-12, "x3-independent states, every eps"});
}

void check_oracles(ValidationReport& report, const ExperimentConfig& config) {
  const bool quadratic = std::holds_alternative<IsotropicQuadratic>(config.bulk.phase1) &&
                         std::holds_alternative<IsotropicQuadratic>(config.bulk.phase2);
  if (!quadratic) {
    add(report, {"exhaustive-oracle", true, 0.0, 1e-9, "not applicable: densities are not isotropic-quadratic"});
    add(report, {"exhaustive-oracle-equal-phases", true, 0.0, 1e-9, "not applicable: densities are not isotropic-quadratic"});
    add(report, {"direct-solve-oracle", true, 0.0, 1e-8, "not applicable: densities are not isotropic-quadratic"});
    return;
  }
  // The configured pair, then W2 = W1 (pure perimeter competition).
  for (const bool same : {false, true}) {
    LimitProblem small(PlanarMesh(4, 4, config.lx, config.ly));
    small.bulk = config.bulk;
    if (same) small.bulk.phase2 = small.bulk.phase1;
    small.load = config.load;
    if (config.surface) small.surface = convexify_planar(*config.surface, config.surface_directions);
    SolveOptions opts;
    opts.target_fraction = 0.5;
    opts.u_tol = 1e-11;
    const SolveResult solved = solve_limit(small, opts);
    const oracle::ExhaustiveOptimum best = oracle::exhaustive_quadratic_optimum(small, 0.5);
    const double d = std::abs(solved.energy.total - best.energy);
    add(report, {same ? "exhaustive-oracle-equal-phases" : "exhaustive-oracle", d <= 1e-9, d, 1e-9,
                 std::to_string(best.layouts) + " layouts on 4x4"});
  }

  LimitProblem mid(PlanarMesh(8, 8, config.lx, config.ly));
  mid.bulk = config.bulk;
  mid.load = config.load;
  SplitMix64 rng(config.seed + 67);
  const PhaseField chi = random_phase(64, 0.5, rng.next());
  const DisplacementResult r = minimize_u(mid, chi, 1e-11, 20000);
  const double dd = std::abs(r.energy.total - oracle::quadratic_direct_solve(mid, chi).energy);
  add(report, {"direct-solve-oracle", dd <= 1e-8, dd, 1e-8, "8x8 mesh, random balanced layout"});
}

void check_determinism(ValidationReport& report, const ExperimentConfig& config) {
  const GrowthReport a = validate_growth(config.bulk, 500, config.radius, config.seed);
  const GrowthReport b = validate_growth(config.bulk, 500, config.radius, config.seed);
  LimitProblem small(PlanarMesh(6, 6, config.lx, config.ly));
  small.bulk = config.bulk;
  small.load = config.load;
  SolveOptions opts;
  opts.target_fraction = 0.5;
  opts.seeds = {config.seed, config.seed + 1};
  const SolveResult r1 = solve_limit(small, opts);
  const SolveResult r2 = solve_limit(small, opts);
  const bool same = a.worst_margin == b.worst_margin && a.worst_check == b.worst_check &&
                    r1.energy.total == r2.energy.total && r1.state.chi == r2.state.chi && r1.state.u == r2.state.u;
  add(report, {"determinism", same, same ? 0.0 : 1.0, 0.0, "repeated seeded runs are bit-identical"});
}

}  // namespace

ValidationReport run_validation(const ExperimentConfig& config) {
  config.validate();
  ValidationReport report;
  guarded(report, "growth-sandwich", [&] { check_growth(report, config); });
  guarded(report, "envelope", [&] { check_envelope(report, config); });
  guarded(report, "surface", [&] { check_surface(report, config); });
  guarded(report, "rescale", [&] { check_roundtrip(report, config); });
  guarded(report, "assembly", [&] { check_assembly(report, config); });
  guarded(report, "oracles", [&] { check_oracles(report, config); });
  guarded(report, "determinism", [&] { check_determinism(report, config); });
  return report;
}

// ---------------------------------------------------------------------------
// Envelope tables

EnvelopeReport run_envelope_tables(const ExperimentConfig& config) {
  config.validate();
  EnvelopeReport report;
  report.grid = config.envelope_grid;
  const EnvelopeSliceOptions opts{config.laminate_depth, config.cell_n};
  const bool closed = reduction_is_convex(config.bulk.phase1) && reduction_is_convex(config.bulk.phase2);
  for (const NamedSlice& ns : slices_of(config)) {
    EnvelopeSliceResult r = in_stage("envelope_slice(" + ns.name + ")", [&] {
      EnvelopeSliceResult out;
      out.name = ns.name;
      out.slice = ns.slice;
      out.phase1 = envelope_slice(config.bulk, Phase::One, ns.slice, config.envelope_grid, opts);
      out.phase2 = envelope_slice(config.bulk, Phase::Two, ns.slice, config.envelope_grid, opts);
      return out;
    });
    r.closed_form = closed;
    if (closed) {
      for (const auto* table : {&r.phase1, &r.phase2})
        for (const EnvelopeEstimate& e : *table)
          r.max_closed_form_deviation = std::max(r.max_closed_form_deviation, std::abs(e.upper - e.raw));
    }
    report.slices.push_back(std::move(r));
  }
  if (config.surface) report.surface = surface_table(*config.surface, config.surface_directions);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

std::string tool_version() {
#ifdef THINFILM_VERSION
  return THINFILM_VERSION;
#else
  return "0.0.0";
#endif
}

json stamp(const ExperimentConfig& config) {
  return {{"tool", "thinfilm"},
          {"version", tool_version()},
          {"compiler", std::string(__VERSION__)},
          {"seed", config.seed},
          {"planar_seeds", config.planar_seeds()},
          {"slab_seeds", config.slab_seeds()}};
}

json matrix_json(const MembraneGradient& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1)});
  return rows;
}

json restarts_json(const std::vector<RestartRecord>& records) {
  json out = json::array();
  for (const RestartRecord& r : records)
    out.push_back({{"label", r.label}, {"total", r.total}, {"alternations", r.alternations}, {"swaps", r.swaps}});
  return out;
}

json surface_json(const SurfaceTable& table) {
  json out = json::array();
  for (const auto& row : table) out.push_back({{"theta", row[0]}, {"reduced", row[1]}, {"convexified", row[2]}});
  return out;
}

json estimates_json(const std::vector<EnvelopeEstimate>& table) {
  json out = json::array();
  for (const EnvelopeEstimate& e : table)
    out.push_back({{"s", e.s},
                   {"t", e.t},
                   {"raw", e.raw},
                   {"lower", e.lower},
                   {"upper", e.upper},
                   {"method_lower", e.method_lower},
                   {"method_upper", e.method_upper},
                   {"lower_capped", e.lower_capped},
                   {"certified", e.certified}});
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_surface_csv(const SurfaceTable& table, const std::filesystem::path& path) {
  std::ostringstream s;
  s << "theta,reduced,convexified\n";
  for (const auto& row : table) s << num(row[0]) << ',' << num(row[1]) << ',' << num(row[2]) << '\n';
  write_text(path, s.str());
}

}  // namespace

nlohmann::json to_json(const EnergyBreakdown& e) {
  return {{"bulk", e.bulk},
          {"load", e.load},
          {"perimeter", e.perimeter},
          {"total", e.total},
          {"constraint_residual", e.constraint_residual},
          {"fallback_evaluations", e.fallback_evaluations},
          {"stationary_suspect", e.stationary_suspect},
          {"iterations_logged", e.log.size()}};
}

nlohmann::json to_json(const CompactnessDiagnostics& d) {
  return {{"u_norm", d.u_norm},
          {"membrane_gradient_norm", d.membrane_gradient_norm},
          {"scaled_transverse_norm", d.scaled_transverse_norm},
          {"scaled_perimeter", d.scaled_perimeter},
          {"transverse_interface_area", d.transverse_interface_area}};
}

nlohmann::json to_json(const SweepReport& r) {
  json entries = json::array();
  for (const SweepEntry& e : r.entries)
    entries.push_back({{"epsilon", e.epsilon},
                       {"energy", to_json(e.energy)},
                       {"gap", e.gap},
                       {"relative_gap", e.relative_gap},
                       {"diagnostics", to_json(e.diagnostics)},
                       {"polished", e.polished},
                       {"fraction", e.state.chi.fraction()},
                       {"restarts", restarts_json(e.restarts)}});
  return {{"kind", "sweep"},
          {"name", r.name},
          {"lambda", r.lambda},
          {"planar_fraction", r.planar_fraction},
          {"convention", to_string(r.convention)},
          {"anisotropic", r.anisotropic},
          {"limit",
           {{"energy", to_json(r.limit)},
            {"fraction", r.limit_state.chi.fraction()},
            {"exhaustive", r.limit_exhaustive},
            {"restarts", restarts_json(r.limit_restarts)}}},
          {"entries", entries},
          {"verdict",
           {{"monotone", r.verdict.monotone},
            {"final_relative_gap", r.verdict.final_relative_gap},
            {"slack", r.slack},
            {"threshold", r.threshold},
            {"passed", r.verdict.passed}}},
          {"surface", surface_json(r.surface)}};
}

nlohmann::json to_json(const ValidationReport& r) {
  json checks = json::array();
  for (const Check& c : r.checks)
    checks.push_back(
        {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}, {"detail", c.detail}});
  return {{"kind", "validation"}, {"checks", checks}, {"passed", r.passed()}};
}

nlohmann::json to_json(const EnvelopeReport& r) {
  json slices = json::array();
  for (const EnvelopeSliceResult& s : r.slices)
    slices.push_back({{"name", s.name},
                      {"origin", matrix_json(s.slice.origin)},
                      {"dir1", matrix_json(s.slice.dir1)},
                      {"dir2", matrix_json(s.slice.dir2)},
                      {"s_range", {s.slice.s_min, s.slice.s_max}},
                      {"t_range", {s.slice.t_min, s.slice.t_max}},
                      {"closed_form", s.closed_form},
                      {"max_closed_form_deviation", s.max_closed_form_deviation},
                      {"phase1", estimates_json(s.phase1)},
                      {"phase2", estimates_json(s.phase2)}});
  return {{"kind", "envelope"}, {"grid", r.grid}, {"slices", slices}, {"surface", surface_json(r.surface)}};
}

nlohmann::json config_json(const ExperimentConfig& c) {
  return {{"name", c.name},
          {"phase1", c.phase1_text},
          {"phase2", c.phase2_text},
          {"growth", {{"beta_lower", c.bulk.growth.beta_lower}, {"beta_upper", c.bulk.growth.beta_upper}, {"p", c.bulk.growth.p}}},
          {"surface", c.surface_text},
          {"surface_directions", c.surface_directions},
          {"load", c.load_text},
          {"mesh", {{"nx", c.nx}, {"ny", c.ny}, {"layers", c.layers}, {"lx", c.lx}, {"ly", c.ly}}},
          {"lambda", c.lambda},
          {"convention", to_string(c.convention)},
          {"epsilons", c.epsilons},
          {"density_mode", to_string(c.density_mode)},
          {"alternations", c.alternations},
          {"restarts", c.restarts},
          {"restarts3d", c.restarts3d},
          {"u_tol", c.u_tol},
          {"u_max_iter", c.u_max_iter},
          {"alternation_tol", c.alternation_tol},
          {"slack", c.slack},
          {"threshold", c.threshold},
          {"samples", c.samples},
          {"radius", c.radius},
          {"envelope", {{"grid", c.envelope_grid}, {"laminate_depth", c.laminate_depth}, {"cell_n", c.cell_n}}}};
}

void write_sweep_outputs(const SweepReport& report, const ExperimentConfig& config, const std::string& dir, bool plot) {
  ensure_dir(dir);
  const std::filesystem::path root(dir);
  json doc = to_json(report);
  doc["config"] = config_json(config);
  doc["environment"] = stamp(config);
  write_text(root / "report.json", doc.dump(2) + "\n");

  std::ostringstream csv;
  csv << "epsilon,total,bulk,load,perimeter,gap,relative_gap,u_norm,membrane_gradient_norm,"
         "scaled_transverse_norm,scaled_perimeter,transverse_interface_area,polished\n";
  csv << "0," << num(report.limit.total) << ',' << num(report.limit.bulk) << ',' << num(report.limit.load) << ','
      << num(report.limit.perimeter) << ",0,0,,,,,,0\n";
  for (const SweepEntry& e : report.entries) {
    const CompactnessDiagnostics& d = e.diagnostics;
    csv << num(e.epsilon) << ',' << num(e.energy.total) << ',' << num(e.energy.bulk) << ',' << num(e.energy.load)
        << ',' << num(e.energy.perimeter) << ',' << num(e.gap) << ',' << num(e.relative_gap) << ',' << num(d.u_norm)
        << ',' << num(d.membrane_gradient_norm) << ',' << num(d.scaled_transverse_norm) << ','
        << num(d.scaled_perimeter) << ',' << num(d.transverse_interface_area) << ',' << (e.polished ? 1 : 0) << '\n';
  }
  write_text(root / "sweep.csv", csv.str());

  std::ostringstream rs;
  rs << "stage,label,total,alternations,swaps\n";
  auto rows = [&](const std::string& stage, const std::vector<RestartRecord>& records) {
    for (const RestartRecord& r : records)
      rs << stage << ',' << r.label << ',' << num(r.total) << ',' << r.alternations << ',' << r.swaps << '\n';
  };
  rows("limit", report.limit_restarts);
  for (const SweepEntry& e : report.entries) rows("eps=" + num(e.epsilon), e.restarts);
  write_text(root / "restarts.csv", rs.str());

  const int nx = config.nx, ny = config.ny;
  write_field((root / "limit_phase.txt").string(), phase_dump(report.limit_state.chi, nx, ny));
  write_field((root / "limit_displacement.txt").string(), displacement_dump(report.limit_state.u, nx + 1, ny + 1));
  for (std::size_t k = 0; k < report.entries.size(); ++k) {
    const SweepEntry& e = report.entries[k];
    const std::string stem = "eps" + std::to_string(k);
    write_field((root / (stem + "_phase.txt")).string(), phase_dump(e.state.chi, nx, ny, config.layers));
    write_field((root / (stem + "_displacement.txt")).string(),
                displacement_dump(e.state.u, nx + 1, ny + 1, config.layers + 1));
  }
  if (!report.surface.empty()) write_surface_csv(report.surface, root / "surface.csv");
  if (plot) {
    write_text(root / "gap.svg", svg_gap_curve(report));
    write_text(root / "limit_phase.svg", svg_phase_layout(report.limit_state.chi, nx, ny));
    if (!report.entries.empty())
      for (int layer = 0; layer < config.layers; ++layer)
        write_text(root / ("eps_last_layer" + std::to_string(layer) + ".svg"),
                   svg_phase_layout(report.entries.back().state.chi, nx, ny, layer));
  }
}

void write_validation_outputs(const ValidationReport& report, const ExperimentConfig& config, const std::string& dir) {
  ensure_dir(dir);
  const std::filesystem::path root(dir);
  json doc = to_json(report);
  doc["config"] = config_json(config);
  doc["environment"] = stamp(config);
  write_text(root / "report.json", doc.dump(2) + "\n");
  std::ostringstream csv;
  csv << "check,passed,value,tolerance\n";
  for (const Check& c : report.checks)
    csv << c.name << ',' << (c.passed ? 1 : 0) << ',' << num(c.value) << ',' << num(c.tolerance) << '\n';
  write_text(root / "checks.csv", csv.str());
}

void write_envelope_outputs(const EnvelopeReport& report, const ExperimentConfig& config, const std::string& dir) {
  ensure_dir(dir);
  const std::filesystem::path root(dir);
  json doc = to_json(report);
  doc["config"] = config_json(config);
  doc["environment"] = stamp(config);
  write_text(root / "report.json", doc.dump(2) + "\n");
  for (const EnvelopeSliceResult& s : report.slices) {
    std::ostringstream csv;
    csv << "phase,s,t,raw,lower,upper,method_upper,lower_capped,certified\n";
    for (int p = 1; p <= 2; ++p)
      for (const EnvelopeEstimate& e : p == 1 ? s.phase1 : s.phase2)
        csv << p << ',' << num(e.s) << ',' << num(e.t) << ',' << num(e.raw) << ',' << num(e.lower) << ','
            << num(e.upper) << ',' << e.method_upper << ',' << (e.lower_capped ? 1 : 0) << ','
            << (e.certified ? 1 : 0) << '\n';
    write_text(root / ("envelope_" + s.name + ".csv"), csv.str());
  }
  if (!report.surface.empty()) write_surface_csv(report.surface, root / "surface.csv");
}

std::string svg_gap_curve(const SweepReport& report) {
  const double W = 480, H = 320, m = 48;
  std::vector<std::pair<double, double>> pts;
  for (const SweepEntry& e : report.entries)
    pts.emplace_back(-std::log2(e.epsilon), std::log10(std::max(e.gap, 1e-16)));
  double x0 = 0, x1 = 1, y0 = -16, y1 = 0;
  if (!pts.empty()) {
    x0 = x1 = pts[0].first;
    y0 = y1 = pts[0].second;
    for (auto [x, y] : pts) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
    if (x1 - x0 < 1e-9) x1 = x0 + 1;
    y0 = std::floor(y0) - 1, y1 = std::ceil(y1) + 1;
  }
  auto X = [&](double x) { return m + (W - 2 * m) * (x - x0) / (x1 - x0); };
  auto Y = [&](double y) { return H - m - (H - 2 * m) * (y - y0) / (y1 - y0); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << m << "\" y1=\"" << H - m << "\" x2=\"" << W - m << "\" y2=\"" << H - m
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << H - m << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">-log2(eps)</text>\n";
  s << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
    << ")\" text-anchor=\"middle\">log10 |J_eps - J_0|</text>\n";
  s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (auto [x, y] : pts) s << X(x) << ',' << Y(y) << ' ';
  s << "\"/>\n";
  for (auto [x, y] : pts) s << "<circle cx=\"" << X(x) << "\" cy=\"" << Y(y) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  s << "</svg>\n";
  return s.str();
}

std::string svg_phase_layout(const PhaseField& chi, int nx, int ny, int layer) {
  const int px = 16;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << nx * px << "\" height=\"" << ny * px << "\">\n";
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = static_cast<std::size_t>(layer) * nx * ny + j * nx + i;
      const bool one = c < chi.values.size() && chi.values[c];
      s << "<rect x=\"" << i * px << "\" y=\"" << (ny - 1 - j) * px << "\" width=\"" << px << "\" height=\"" << px
        << "\" fill=\"" << (one ? "#333333" : "#eeeeee") << "\"/>\n";
    }
  s << "</svg>\n";
  return s.str();
}

}  // namespace thinfilm
