#include "thinfilm/oracles.hpp"
#include "thinfilm/solve3d.hpp"

#include <doctest.h>

using namespace thinfilm;

namespace {

BulkDensitySpec kohn_strang() {
  BulkDensitySpec s;
  s.phase1 = IsotropicQuadratic{1.0};
  s.phase2 = IsotropicQuadratic{2.0};
  s.growth = {1.0, 2.0, 2.0};
  return s;
}

LimitProblem planar(int n, const LoadField& load = LoadField::constant(Vec3(0, 0, 40))) {
  LimitProblem p{PlanarMesh(n, n)};
  p.bulk = kohn_strang();
  p.load = load;
  return p;
}

Displacement random_u(SplitMix64& rng, int nodes, const std::function<bool(int)>& clamped) {
  Displacement u = Displacement::Zero(3 * nodes);
  for (int k = 0; k < nodes; ++k)
    if (!clamped(k)) u.segment<3>(3 * k) = Vec3(rng.normal(), rng.normal(), rng.normal());
  return u;
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("planar counts and interior edges") {
    const PlanarMesh m(4, 3, 2.0, 1.5);
    CHECK(m.cell_count() == 12);
    CHECK(m.node_count() == 20);
    CHECK(m.interior_edges().size() == 3 * 3 + 4 * 2);
    CHECK(m.boundary_node(0));
    CHECK_FALSE(m.boundary_node(m.node(1, 1)));
    CHECK(m.cell_nodes(m.cell(1, 2))[3] == m.node(2, 3));
    CHECK_THROWS_AS(PlanarMesh(1, 4), DomainError);
  }

  TEST_CASE("slab counts and faces") {
    const SlabMesh s(PlanarMesh(3, 2), 4);
    CHECK(s.cell_count() == 24);
    CHECK(s.node_count() == 12 * 5);
    const std::size_t lateral = 4 * (2 * 2 + 3 * 1);
    CHECK(s.interior_faces().size() == lateral + 3 * 6);
    CHECK(s.cell_center(s.cell(0, 0)).z() == doctest::Approx(-0.75));
    CHECK(s.lateral_boundary_node(s.node(0, 2)));
  }
}

TEST_SUITE("load") {
  TEST_CASE("transverse integral is exact for polynomials") {
    const LoadField f = LoadField::polynomial({{Vec3(1, 0, 0), {0, 0, 2}}, {Vec3(0, 3, 0), {1, 0, 1}}});
    const Vec3 i = f.transverse_integral(0.5, 0.2);
    CHECK(i.x() == doctest::Approx(2.0 / 3.0));
    CHECK(i.y() == doctest::Approx(0.0));
    CHECK_FALSE(f.transverse_uniform());
    CHECK(LoadField::constant(Vec3(1, 2, 3)).transverse_integral(0, 0).isApprox(Vec3(2, 4, 6)));
    CHECK(LoadField::conjugate_exponent(2.0) == 2.0);
  }
}

TEST_SUITE("solve2d") {
  TEST_CASE("energy agrees with the naive assembly and is conserved") {
    SplitMix64 rng(1);
    LimitProblem p = planar(5);
    p.surface = convexify_planar(SurfaceDensitySpec::make(WeightedQuadraticSurface{Vec3(1, 3, 2)}), 64);
    const PhaseField chi = random_phase(25, 0.4, 3);
    const Displacement u = random_u(rng, p.mesh.node_count(), [&](int n) { return p.mesh.boundary_node(n); });
    const EnergyBreakdown e = energy_2d(p, chi, u, 0.4);
    const EnergyBreakdown o = oracle::naive_energy_2d(p, chi, u);
    CHECK(std::abs(e.total - o.total) <= 1e-12 * std::max(1.0, std::abs(o.total)));
    CHECK(std::abs(e.total - (e.bulk - e.load + e.perimeter)) <= 1e-12);
    CHECK(e.constraint_residual == doctest::Approx(0.0));
  }

  TEST_CASE("minimize_u matches the direct solve") {
    const LimitProblem p = planar(8);
    const PhaseField chi = random_phase(64, 0.5, 5);
    const DisplacementResult r = minimize_u(p, chi, 1e-11, 20000);
    CHECK(std::abs(r.energy.total - oracle::quadratic_direct_solve(p, chi).energy) <= 1e-8);
  }

  TEST_CASE("solver reaches the exhaustive optimum on 4x4") {
    for (double alpha2 : {1.0, 2.0}) {
      CAPTURE(alpha2);
      LimitProblem p = planar(4);
      p.bulk.phase2 = IsotropicQuadratic{alpha2};
      SolveOptions o;
      o.target_fraction = 0.5;
      o.u_tol = 1e-11;
      o.exhaustive = ExhaustiveMode::Off;
      o.seeds = {1, 2, 3, 4, 5, 6};
      const SolveResult r = solve_limit(p, o);
      const oracle::ExhaustiveOptimum best = oracle::exhaustive_quadratic_optimum(p, 0.5);
      CHECK(best.layouts == 12870);
      CHECK(std::abs(r.energy.total - best.energy) <= 1e-9);
      o.exhaustive = ExhaustiveMode::On;
      const SolveResult ex = solve_limit(p, o);
      CHECK(ex.exhaustive);
      CHECK(std::abs(ex.energy.total - best.energy) <= 1e-9);
    }
  }

  TEST_CASE("pure perimeter optimum is a straight cut") {
    LimitProblem p = planar(4, LoadField::zero());
    p.bulk.phase2 = IsotropicQuadratic{1.0};
    SolveOptions o;
    o.target_fraction = 0.5;
    const SolveResult r = solve_limit(p, o);
    CHECK(r.energy.total == doctest::Approx(2.0 * 1.0));
  }

  TEST_CASE("swap descent never increases the energy") {
    const LimitProblem p = planar(6);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const PhaseField chi = random_phase(36, 0.5, seed);
      const DisplacementResult r = minimize_u(p, chi);
      SwapStats stats;
      const PhaseField next = update_phase(p, r.u, chi, seed, &stats);
      CHECK(next.ones() == chi.ones());
      const double after = energy_2d(p, next, r.u).total;
      CHECK(after <= r.energy.total + 1e-12);
      CHECK(after - r.energy.total == doctest::Approx(stats.energy_change).epsilon(1e-9));
    }
  }

  TEST_CASE("degenerate fraction with zero load has zero energy") {
    const LimitProblem p = planar(4, LoadField::zero());
    SolveOptions o;
    o.target_fraction = 0.0;
    const SolveResult r = solve_limit(p, o);
    CHECK(r.energy.total == 0.0);
    CHECK(r.state.chi.ones() == 0);
  }

  TEST_CASE("volume targets must be representable") {
    CHECK(required_ones(16, 0.25) == 4);
    CHECK_THROWS_AS(required_ones(16, 0.3), DomainError);
    CHECK_THROWS_AS(required_ones(16, 1.5), DomainError);
  }

  TEST_CASE("closed-form mode refuses non-convex reductions") {
    LimitProblem p = planar(4);
    p.bulk.phase1 = TwoWell{};
    p.mode = DensityMode::ClosedForm;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.mode = DensityMode::Tabulated;
    p.bulk = kohn_strang();
    CHECK_THROWS_AS(p.validate(), DomainError);
  }

  TEST_CASE("seeded solves are reproducible") {
    const LimitProblem p = planar(6);
    SolveOptions o;
    o.seeds = {3, 4};
    const SolveResult a = solve_limit(p, o), b = solve_limit(p, o);
    CHECK(a.energy.total == b.energy.total);
    CHECK(a.state.chi == b.state.chi);
  }
}

TEST_SUITE("solve3d") {
  TEST_CASE("energy agrees with the naive assembly") {
    SplitMix64 rng(2);
    SlabProblem p(SlabMesh(PlanarMesh(3, 3), 3), 0.25);
    p.bulk = kohn_strang();
    p.load = LoadField::polynomial({{Vec3(0, 0, 4), {0, 0, 0}}, {Vec3(1, 0, 2), {1, 0, 2}}});
    p.surface = SurfaceDensitySpec::make(LpNormSurface{3.0});
    PhaseField chi;
    for (int c = 0; c < p.mesh.cell_count(); ++c) chi.values.push_back(static_cast<std::uint8_t>(rng.below(2)));
    const Displacement u =
        random_u(rng, p.mesh.node_count(), [&](int n) { return p.mesh.lateral_boundary_node(n); });
    const EnergyBreakdown e = energy_3d(p, chi, u);
    const EnergyBreakdown o = oracle::naive_energy_3d(p, chi, u);
    CHECK(std::abs(e.total - o.total) <= 1e-12 * std::max(1.0, std::abs(o.total)));
    CHECK(std::abs(e.total - (e.bulk - e.load + e.perimeter)) <= 1e-12 * std::max(1.0, std::abs(e.total)));
  }

  TEST_CASE("extruded states carry the planar energy at every epsilon") {
    SplitMix64 rng(3);
    const LimitProblem p2 = planar(4);
    const PhaseField chi = random_phase(16, 0.5, 7);
    const Displacement u = random_u(rng, p2.mesh.node_count(), [&](int n) { return p2.mesh.boundary_node(n); });
    const double j0 = energy_2d(p2, chi, u).total;
    for (double eps : {1.0, 0.1, 1e-3}) {
      SlabProblem p3(SlabMesh(PlanarMesh(4, 4), 3), eps);
      p3.bulk = p2.bulk;
      p3.load = p2.load;
      const DesignState s = extrude(p3.mesh, {chi, u});
      CHECK(std::abs(energy_3d(p3, s.chi, s.u).total - j0) <= 1e-12 * std::max(1.0, std::abs(j0)));
      const CompactnessDiagnostics d = compactness(p3, s.chi, s.u);
      CHECK(d.scaled_transverse_norm <= 1e-12);
      CHECK(d.transverse_interface_area == 0.0);
    }
  }

  TEST_CASE("rescaling identities") {
    const SlabMesh mesh(PlanarMesh(3, 3), 4);
    const PhaseField chi = random_phase(36, 0.5, 2);
    VectorPolynomial affine;
    affine.terms = {{Vec3(1, 2, 3), {1, 0, 0}}, {Vec3(0.5, 0, -1), {0, 0, 1}}};
    const RoundtripReport a = rescale_roundtrip_check(affine, 0.5, IsotropicQuadratic{1.0}, mesh, chi);
    CHECK(std::abs(a.bulk_difference) <= 1e-12 * std::max(1.0, std::abs(a.physical)));
    CHECK(std::abs(a.perimeter_difference) <= 1e-12 * std::max(1.0, a.perimeter_physical));
    VectorPolynomial quad;
    quad.terms = {{Vec3(0, 0, 1), {0, 0, 2}}};
    const RoundtripReport q = rescale_roundtrip_check(quad, 0.25, PowerLaw{1.0, 2.0}, mesh, chi);
    CHECK(std::abs(q.bulk_difference) <= 1e-10 * std::max(1.0, std::abs(q.physical)));
    VectorPolynomial quartic;
    quartic.terms = {{Vec3(0, 0, 1), {0, 0, 4}}};
    CHECK_THROWS_AS(rescale_roundtrip_check(quartic, 0.5, IsotropicQuadratic{}, mesh, chi), DomainError);
  }

  TEST_CASE("non-positive epsilon is rejected") {
    SlabProblem p(SlabMesh(PlanarMesh(2, 2), 2), 0.0);
    p.bulk = kohn_strang();
    CHECK_THROWS_AS(p.validate(), DomainError);
  }

  TEST_CASE("slab minimizer is never worse than the extruded limit") {
    const LimitProblem p2 = planar(4);
    SolveOptions o2;
    const SolveResult limit = solve_limit(p2, o2);
    SlabProblem p3(SlabMesh(PlanarMesh(4, 4), 2), 0.5);
    p3.bulk = p2.bulk;
    p3.load = p2.load;
    SolveOptions o3;
    o3.exhaustive = ExhaustiveMode::Off;
    o3.warm_starts = {extrude(p3.mesh, limit.state)};
    const SlabSolveResult r = minimize_eps(p3, o3);
    CHECK(r.solve.energy.total <= limit.energy.total + 1e-9);
    CHECK(r.solve.state.chi.fraction() == 0.5);
  }
}
