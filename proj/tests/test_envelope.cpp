#include "thinfilm/envelope.hpp"

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

BulkDensitySpec two_well() {
  TwoWell tw;
  tw.plus(0, 0) = 1.0;
  tw.minus(0, 0) = -1.0;
  BulkDensitySpec s;
  s.phase1 = tw;
  s.phase2 = tw;
  s.growth = {0.5, 4.0, 2.0};
  return s;
}

}  // namespace

TEST_SUITE("envelope") {
  TEST_CASE("convex densities: cell problem returns the reduced density") {
    const BulkDensitySpec s = kohn_strang();
    SplitMix64 rng(2);
    const MembraneGradient F = sample_ball<3, 2>(rng, 1.5);
    for (int n : {1, 2, 4, 8}) {
      CAPTURE(n);
      CHECK(std::abs(cell_problem_upper(s, Phase::Two, F, n) - 2.0 * F.squaredNorm()) <= 1e-6);
    }
  }

  TEST_CASE("two-well at zero: laminate vanishes and the cell values decrease") {
    const BulkDensitySpec s = two_well();
    const MembraneGradient zero = MembraneGradient::Zero();
    CHECK(laminate_upper(s, Phase::One, zero, 1) == 0.0);
    double previous = eval_membrane(s, Phase::One, zero);
    CHECK(previous == doctest::Approx(1.0));
    for (int n : {1, 2, 4, 8}) {
      const double v = cell_problem_upper(s, Phase::One, zero, n);
      CHECK(v <= previous + 1e-12);
      previous = v;
    }
    CHECK(previous < 1.0);
  }

  TEST_CASE("laminate bounds are ordered") {
    const BulkDensitySpec s = two_well();
    SplitMix64 rng(3);
    for (int k = 0; k < 3; ++k) {
      const MembraneGradient F = sample_ball<3, 2>(rng, 1.0);
      const double raw = eval_membrane(s, Phase::One, F);
      const double d1 = laminate_upper(s, Phase::One, F, 1);
      const double d2 = laminate_upper(s, Phase::One, F, 2);
      CHECK(d1 <= raw + 1e-12);
      CHECK(d2 <= d1 + 1e-12);
      CHECK(d2 >= -1e-12);
    }
    CHECK_THROWS_AS(laminate_upper(s, Phase::One, MembraneGradient::Zero(), 3), DomainError);
  }

  TEST_CASE("grid convex envelope of a convex function is itself") {
    std::vector<double> s{-1, -0.5, 0, 0.5, 1}, t{-1, 0, 1}, v;
    for (double tj : t)
      for (double si : s) v.push_back(si * si + 2 * tj * tj + si * tj);
    const std::vector<double> env = grid_convex_envelope(s, t, v);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(env[k] == doctest::Approx(v[k]).epsilon(1e-12));
  }

  TEST_CASE("grid convex envelope of a double well fills the middle") {
    std::vector<double> s, t{0.0, 1.0}, v;
    for (int i = 0; i <= 8; ++i) s.push_back(-1.0 + 0.25 * i);
    for (int j = 0; j < 2; ++j)
      for (double si : s) v.push_back((si * si - 1) * (si * si - 1));
    const std::vector<double> env = grid_convex_envelope(s, t, v);
    for (std::size_t k = 0; k < env.size(); ++k) CHECK(std::abs(env[k]) <= 1e-12);
  }

  TEST_CASE("Kohn-Strang slice: brackets collapse onto the closed form") {
    const BulkDensitySpec s = kohn_strang();
    Slice slice;
    slice.dir1(0, 0) = 1.0;
    slice.dir2(1, 1) = 1.0;
    const auto table = envelope_slice(s, Phase::One, slice, 3, {1, 2});
    REQUIRE(table.size() == 9);
    for (const EnvelopeEstimate& e : table) {
      CHECK(std::abs(e.upper - e.point.squaredNorm()) <= 1e-6);
      CHECK(std::abs(e.lower - e.upper) <= 1e-6);
    }
  }

  TEST_CASE("two-well slice: midpoint upper bound is small") {
    const BulkDensitySpec s = two_well();
    Slice slice;
    slice.dir1(0, 0) = 1.0;
    slice.dir2(1, 1) = 1.0;
    const auto table = envelope_slice(s, Phase::One, slice, 3, {1, 2});
    CHECK(table[4].upper <= 1e-3);
    CHECK(table[4].lower <= table[4].upper + 1e-12);
  }

  TEST_CASE("slice validation") {
    Slice slice;
    slice.dir1(0, 0) = 1.0;
    slice.dir2(0, 0) = 1.0;
    CHECK_THROWS_AS(slice.validate(), DomainError);
  }

  TEST_CASE("tabulated lookup reproduces nodes and rejects off-plane gradients") {
    const BulkDensitySpec s = kohn_strang();
    Slice slice;
    slice.dir1(0, 0) = 1.0;
    slice.dir2(1, 1) = 1.0;
    const EnvelopeTable table = EnvelopeTable::build(s, slice, 5, {1, 1});
    const auto hit = table.lookup(Phase::Two, slice.at(0.5, -0.5));
    REQUIRE(hit.has_value());
    CHECK(hit->value == doctest::Approx(2.0 * 0.5).epsilon(1e-9));
    MembraneGradient off = slice.at(0.0, 0.0);
    off(2, 1) = 0.3;
    CHECK_FALSE(table.lookup(Phase::Two, off).has_value());
    CHECK_FALSE(table.lookup(Phase::Two, slice.at(2.0, 0.0)).has_value());
  }
}
