// Acceptance run: one line per criterion, exit status 0 only if all pass.

#include "thinfilm/harness.hpp"
#include "thinfilm/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

using namespace thinfilm;

namespace {

// Frozen tolerances.
constexpr double kSlack = 0.05;
constexpr double kThreshold = 0.10;
constexpr double kRuntimeSeconds = 300.0;
constexpr double kHullTol = 1e-5;
constexpr double kClosedFormTol = 1e-6;
constexpr double kCellTol = 1e-6;
constexpr double kExhaustiveTol = 1e-9;
constexpr double kDirectTol = 1e-8;
constexpr double kRoundtripTol = 1e-10;
constexpr double kIdentityTol = 1e-12;

std::string config_path(const char* name) { return std::string(THINFILM_SOURCE_DIR) + "/configs/" + name; }

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome sweep_criterion(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const SweepReport r = run_sweep(c);
  const double secs = seconds_since(t0);
  double worst_ratio = 0.0;
  for (std::size_t k = 1; k < r.entries.size(); ++k)
    worst_ratio = std::max(worst_ratio, r.entries[k].gap - (1 + kSlack) * r.entries[k - 1].gap);
  const bool ok = r.verdict.monotone && r.verdict.final_relative_gap <= kThreshold && secs <= kRuntimeSeconds;
  return {ok, fmt("J0=%.6f final_rel_gap=%.3e (<=0.10) ", r.limit.total, r.verdict.final_relative_gap) +
                  fmt("max_excess=%.2e runtime=%.1fs", worst_ratio, secs)};
}

Outcome criterion1() {
  ExperimentConfig c = load_config(config_path("kohn_strang.cfg"));
  c.slack = kSlack;
  c.threshold = kThreshold;
  return sweep_criterion(c);
}

Outcome criterion2() {
  ExperimentConfig c = load_config(config_path("anisotropic.cfg"));
  c.slack = kSlack;
  c.threshold = kThreshold;
  Outcome sweep = sweep_criterion(c);
  const PlanarSurfaceDensity planar = convexify_planar(*c.surface, c.surface_directions);
  std::vector<double> angles, values;
  for (int k = 0; k < c.surface_directions; ++k) {
    const double th = 2.0 * std::numbers::pi * k / c.surface_directions;
    angles.push_back(th);
    values.push_back(oracle::reduced_surface_by_grid(*c.surface, Vec2(std::cos(th), std::sin(th))));
  }
  double dev = 0.0;
  for (int k = 0; k < 360; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 360;
    const Vec2 e(std::cos(th), std::sin(th));
    dev = std::max(dev, std::abs(planar(e) - oracle::homogeneous_hull(angles, values, e)));
  }
  return {sweep.passed && dev <= kHullTol, sweep.detail + fmt(" hull_dev=%.2e (<=1e-5)", dev)};
}

Outcome criterion3() {
  const ExperimentConfig c = load_config(config_path("kohn_strang.cfg"));
  std::vector<NamedSlice> slices = c.slices;
  // A generic slice away from the coordinate planes.
  SplitMix64 rng(31);
  Slice generic;
  generic.origin = sample_ball<3, 2>(rng, 0.5);
  MembraneGradient d1 = sample_ball<3, 2>(rng, 1.0), d2 = sample_ball<3, 2>(rng, 1.0);
  d1 /= d1.norm();
  d2 -= frob_dot(d1, d2) * d1;
  d2 /= d2.norm();
  generic.dir1 = d1;
  generic.dir2 = d2;
  slices.push_back({"generic", generic});
  double dev = 0.0;
  std::size_t points = 0;
  for (const NamedSlice& ns : slices)
    for (Phase phase : {Phase::One, Phase::Two}) {
      const double alpha = phase == Phase::One ? 1.0 : 2.0;
      const auto table = envelope_slice(c.bulk, phase, ns.slice, ns.name == "generic" ? 3 : c.envelope_grid,
                                        {c.laminate_depth, c.cell_n});
      for (const EnvelopeEstimate& e : table) {
        dev = std::max(dev, std::abs(e.upper - alpha * e.point.squaredNorm()));
        ++points;
      }
    }
  return {dev <= kClosedFormTol, fmt("max|upper - closed form|=%.2e over %.0f points (<=1e-6)", dev, points)};
}

Outcome criterion4() {
  BulkDensitySpec ks;
  ks.phase1 = IsotropicQuadratic{1.0};
  ks.phase2 = IsotropicQuadratic{2.0};
  ks.growth = {1.0, 2.0, 2.0};
  SplitMix64 rng(41);
  double dev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const MembraneGradient F = sample_ball<3, 2>(rng, 1.5);
    for (Phase phase : {Phase::One, Phase::Two})
      for (int n : {1, 2, 4, 8})
        dev = std::max(dev, std::abs(cell_problem_upper(ks, phase, F, n) - eval_membrane(ks, phase, F)));
  }
  TwoWell tw;
  tw.plus(0, 0) = 1.0;
  tw.minus(0, 0) = -1.0;
  BulkDensitySpec wells;
  wells.phase1 = tw;
  wells.phase2 = tw;
  wells.growth = {0.5, 4.0, 2.0};
  const MembraneGradient zero = MembraneGradient::Zero();
  bool monotone = true;
  double previous = eval_membrane(wells, Phase::One, zero);
  std::string values;
  for (int n : {1, 2, 4, 8}) {
    const double v = cell_problem_upper(wells, Phase::One, zero, n);
    if (v > previous) monotone = false;
    previous = v;
    values += fmt("%.4f ", v);
  }
  const double lam = laminate_upper(wells, Phase::One, zero, 1);
  return {dev <= kCellTol && monotone && lam == 0.0,
          fmt("convex_dev=%.2e (<=1e-6) laminate(0)=%.1e ", dev, lam) + "two-well N=1,2,4,8: " + values};
}

Outcome criterion5() {
  double worst = 0.0;
  std::string detail;
  for (double alpha2 : {1.0, 2.0}) {
    LimitProblem p{PlanarMesh(4, 4)};
    p.bulk.phase1 = IsotropicQuadratic{1.0};
    p.bulk.phase2 = IsotropicQuadratic{alpha2};
    p.bulk.growth = {1.0, 2.0, 2.0};
    p.load = LoadField::constant(Vec3(0, 0, 40));
    SolveOptions o;
    o.target_fraction = 0.5;
    o.u_tol = 1e-11;
    const SolveResult r = solve_limit(p, o);
    const oracle::ExhaustiveOptimum best = oracle::exhaustive_quadratic_optimum(p, 0.5);
    const double d = std::abs(r.energy.total - best.energy);
    worst = std::max(worst, d);
    detail += fmt(alpha2 == 1.0 ? "pure-perimeter |diff|=%.1e " : "kohn-strang |diff|=%.1e ", d);
  }
  LimitProblem q{PlanarMesh(8, 8)};
  q.bulk.phase1 = IsotropicQuadratic{1.0};
  q.bulk.phase2 = IsotropicQuadratic{2.0};
  q.bulk.growth = {1.0, 2.0, 2.0};
  q.load = LoadField::constant(Vec3(0, 0, 40));
  double direct = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const PhaseField chi = random_phase(64, 0.5, seed);
    const DisplacementResult r = minimize_u(q, chi, 1e-11, 20000);
    direct = std::max(direct, std::abs(r.energy.total - oracle::quadratic_direct_solve(q, chi).energy));
  }
  return {worst <= kExhaustiveTol && direct <= kDirectTol,
          detail + fmt("(<=1e-9) direct-solve |diff|=%.1e (<=1e-8)", direct)};
}

Outcome from_checks(const ValidationReport& r, const std::vector<std::string>& names, const std::string& label) {
  bool ok = true;
  std::string failed;
  for (const Check& c : r.checks)
    for (const std::string& n : names)
      if (c.name == n && !c.passed) {
        ok = false;
        failed += " " + c.name;
      }
  return {ok, label + (ok ? " ok" : " failed:" + failed)};
}

Outcome criterion6() {
  ExperimentConfig c = load_config(config_path("anisotropic.cfg"));
  c.samples = 10000;
  const std::vector<std::string> names{"growth-sandwich", "envelope-lipschitz", "surface-growth",
                                       "planar-envelope-properties"};
  const Outcome a = from_checks(run_validation(c), names, "weighted-quadratic:");
  ExperimentConfig m = c;
  m.surface = parse_surface("angular-modulated amplitude=0.4 lobes=4 n_theta=48 n_z=17");
  // Wells at ±e1⊗e1/2 keep (|F| - 1/2)^2 >= (|F|^2 - 1)/4.
  m.bulk.phase1 = parse_density("two-well alpha=1 plus=0.5,0,0,0,0,0,0,0,0 minus=-0.5,0,0,0,0,0,0,0,0");
  m.bulk.phase2 = parse_density("isotropic-quadratic alpha=2");
  m.bulk.growth = {0.25, 2.0, 2.0};
  m.density_mode = DensityMode::Raw;
  const Outcome b = from_checks(run_validation(m), names, "two-well/angular-modulated:");
  return {a.passed && b.passed, "10^4 samples each; " + a.detail + "; " + b.detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion7() {
  ExperimentConfig c = load_config(config_path("kohn_strang.cfg"));
  c.samples = 1000;
  const ValidationReport v = run_validation(c);
  double worst_rescale = 0.0, worst_identity = 0.0;
  bool ok = true;
  for (const Check& check : v.checks) {
    if (check.name.rfind("rescale-", 0) == 0) {
      worst_rescale = std::max(worst_rescale, check.value);
      ok = ok && check.value <= kRoundtripTol;
    }
    if (check.name.rfind("double-assembly", 0) == 0 || check.name == "slab-planar-consistency") {
      worst_identity = std::max(worst_identity, check.value);
      ok = ok && check.value <= kIdentityTol && check.detail.find("not applicable") == std::string::npos;
    }
  }
  // Byte-identical reruns on a reduced instance.
  ExperimentConfig small = c;
  small.nx = small.ny = 8;
  small.layers = 2;
  small.epsilons = {1.0, 0.25};
  const auto root = std::filesystem::temp_directory_path() / "thinfilm_acceptance";
  std::filesystem::remove_all(root);
  write_sweep_outputs(run_sweep(small), small, (root / "a").string(), false);
  write_sweep_outputs(run_sweep(small), small, (root / "b").string(), false);
  int files = 0, same = 0;
  for (const auto& e : std::filesystem::directory_iterator(root / "a")) {
    ++files;
    same += slurp(e.path()) == slurp(root / "b" / e.path().filename());
  }
  std::filesystem::remove_all(root);
  ok = ok && files > 0 && same == files;
  return {ok, fmt("rescale=%.1e (<=1e-10) identities=%.1e (<=1e-12) ", worst_rescale, worst_identity) +
                  "identical files " + std::to_string(same) + "/" + std::to_string(files)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 gamma-convergence witness (Kohn-Strang)", criterion1},
      {"2 anisotropic perimeter variant", criterion2},
      {"3 closed-form envelope", criterion3},
      {"4 cell problem exactness and monotonicity", criterion4},
      {"5 oracle equivalence", criterion5},
      {"6 property suites", criterion6},
      {"7 exact identities and reruns", criterion7},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::printf("%s criterion %s: %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
