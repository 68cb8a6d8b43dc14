#include "thinfilm/densities.hpp"
#include "thinfilm/oracles.hpp"

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

MembraneGradient sample(std::uint64_t seed, double radius = 2.0) {
  SplitMix64 rng(seed);
  return sample_ball<3, 2>(rng, radius);
}

}  // namespace

TEST_SUITE("densities") {
  TEST_CASE("quadratic reduction drops the transverse column") {
    const BulkDensitySpec s = kohn_strang();
    const MembraneGradient F = sample(3);
    const MembraneReduction r1 = reduce_membrane(s, Phase::One, F);
    CHECK(r1.value == doctest::Approx(F.squaredNorm()).epsilon(1e-14));
    CHECK(r1.argmin.norm() == 0.0);
    CHECK(eval_membrane(s, Phase::Two, F) == doctest::Approx(2.0 * F.squaredNorm()).epsilon(1e-14));
  }

  TEST_CASE("V blends the phases by chi") {
    const BulkDensitySpec s = kohn_strang();
    const FullGradient F = FullGradient::Identity();
    CHECK(eval_full(s, Phase::One, F) == doctest::Approx(3.0));
    CHECK(eval_full(s, Phase::Two, F) == doctest::Approx(6.0));
  }

  TEST_CASE("shifted quadratic reduction keeps only the in-plane mismatch") {
    ShiftedQuadratic d;
    d.alpha = 1.5;
    d.center << 1, 0, 2, 0, 1, -1, 0, 0, 3;
    const MembraneGradient F = sample(5);
    const MembraneReduction r = reduce_membrane(DensityKind{d}, {1, 10, 2}, F);
    CHECK(r.value == doctest::Approx(1.5 * (F - d.center.leftCols<2>()).squaredNorm()).epsilon(1e-12));
    CHECK((r.argmin - d.center.col(2)).norm() < 1e-12);
  }

  TEST_CASE("closed-form reductions agree with the grid oracle") {
    const GrowthCertificate g{0.1, 10.0, 2.0};
    TwoWell tw;
    tw.plus(0, 0) = 1.0;
    tw.minus(0, 0) = -1.0;
    tw.plus(2, 2) = 0.5;
    for (const DensityKind& kind : {DensityKind{IsotropicQuadratic{1.0}}, DensityKind{PowerLaw{1.0, 3.0}},
                                    DensityKind{QuarticWell{1.0}}, DensityKind{tw}}) {
      CAPTURE(kind_name(kind));
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const MembraneGradient F = sample(seed, 1.0);
        const double closed = reduce_membrane(kind, g, F).value;
        const double grid = oracle::reduce_by_grid(kind, F).value;
        CHECK(closed <= grid + 1e-9);
        CHECK(std::abs(closed - grid) <= 1e-6);
      }
    }
  }

  TEST_CASE("numeric reduction of the anisotropic quartic matches the grid oracle") {
    const AnisotropicQuartic d;
    const GrowthCertificate g{0.05, 20.0, 4.0};
    for (std::uint64_t seed = 11; seed <= 15; ++seed) {
      const MembraneGradient F = sample(seed, 1.0);
      const MembraneReduction numeric = reduce_membrane(DensityKind{d}, g, F);
      const MembraneReduction grid = oracle::reduce_by_grid(DensityKind{d}, F);
      CHECK(numeric.certified);
      CHECK(std::abs(numeric.value - grid.value) <= 1e-6);
    }
  }

  TEST_CASE("membrane gradient matches central differences") {
    const AnisotropicQuartic aq;
    BulkDensitySpec s;
    s.phase1 = aq;
    s.phase2 = PowerLaw{1.0, 3.0};
    s.growth = {0.05, 20.0, 4.0};
    for (Phase phase : {Phase::One, Phase::Two}) {
      const MembraneGradient F = sample(21, 1.0);
      const MembraneValueGradient vg = membrane_value_gradient(s, phase, F);
      CHECK(vg.value == doctest::Approx(eval_membrane(s, phase, F)).epsilon(1e-10));
      const double h = 1e-5;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
          MembraneGradient up = F, down = F;
          up(i, j) += h;
          down(i, j) -= h;
          const double fd = (eval_membrane(s, phase, up) - eval_membrane(s, phase, down)) / (2 * h);
          CHECK(vg.gradient(i, j) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
  }

  TEST_CASE("growth validation passes for Kohn-Strang") {
    const GrowthReport r = validate_growth(kohn_strang(), 10000, 3.0, 1);
    CHECK(r.passed);
    CHECK(r.violations == 0);
    CHECK(r.samples == 10000);
    CHECK_FALSE(r.witness.has_value());
  }

  TEST_CASE("corrupted lower constant fails with a witness") {
    BulkDensitySpec s = kohn_strang();
    s.growth.beta_lower = 1.5;  // W1 = |F|^2 violates 1.5 (|F|^2 - 1) for |F| large
    const GrowthReport r = validate_growth(s, 1000, 3.0, 1);
    CHECK_FALSE(r.passed);
    REQUIRE(r.witness.has_value());
    CHECK(r.witness->margin < 0.0);
    CHECK(r.witness->point.size() >= 6);
  }

  TEST_CASE("growth validation is deterministic in the seed") {
    const GrowthReport a = validate_growth(kohn_strang(), 300, 2.0, 9);
    const GrowthReport b = validate_growth(kohn_strang(), 300, 2.0, 9);
    CHECK(a.worst_margin == b.worst_margin);
    CHECK(a.worst_check == b.worst_check);
  }

  TEST_CASE("inadmissible parameters are rejected") {
    BulkDensitySpec s = kohn_strang();
    s.growth.p = 1.0;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = kohn_strang();
    s.growth.beta_upper = 0.5;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = kohn_strang();
    s.phase1 = IsotropicQuadratic{-1.0};
    CHECK_THROWS_AS(s.validate(), DomainError);
  }

  TEST_CASE("convexity flags") {
    CHECK(reduction_is_convex(IsotropicQuadratic{}));
    CHECK(reduction_is_convex(PowerLaw{1.0, 3.0}));
    CHECK_FALSE(reduction_is_convex(TwoWell{}));
    CHECK(reduction_is_convex(QuarticWell{}));  // (max(|F|^2 - r^2, 0))^2
    CHECK(has_analytic_reduction(QuarticWell{}));
    CHECK_FALSE(has_analytic_reduction(AnisotropicQuartic{}));
  }
}
