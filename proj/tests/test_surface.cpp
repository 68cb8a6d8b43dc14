#include "thinfilm/oracles.hpp"
#include "thinfilm/surface.hpp"

#include <doctest.h>

#include <numbers>

using namespace thinfilm;

namespace {

SurfaceDensitySpec modulated() {
  const AngularProfile profile = AngularProfile::tabulate(
      48, 17, [](double theta, double z) { return 1.0 + 0.4 * std::cos(4.0 * theta) * (1.0 - z * z); });
  return SurfaceDensitySpec::make(AngularModulatedSurface{profile});
}

Vec2 unit(double theta) { return {std::cos(theta), std::sin(theta)}; }

}  // namespace

TEST_SUITE("surface") {
  TEST_CASE("euclidean reduction and envelope are the norm") {
    const SurfaceDensitySpec spec;
    const PlanarSurfaceDensity p = convexify_planar(spec, 720);
    CHECK(surface_reduce(spec, Vec2(3, 4)).value == doctest::Approx(5.0).epsilon(1e-10));
    for (int k = 0; k < 720; ++k) {
      const double th = p.angles()[k];
      CHECK(p(unit(th)) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("weighted quadratic reduces to its in-plane block") {
    const SurfaceDensitySpec spec = SurfaceDensitySpec::make(WeightedQuadraticSurface{Vec3(1, 2, 4)});
    CHECK(spec.monotone_in_transverse());
    CHECK(spec.comparability == doctest::Approx(2.0));
    const Vec2 eta(0.3, -0.7);
    CHECK(surface_reduce(spec, eta).value == doctest::Approx(std::sqrt(0.09 + 2 * 0.49)).epsilon(1e-10));
  }

  TEST_CASE("Psi is even and one-homogeneous within its comparability bounds") {
    SplitMix64 rng(4);
    for (const SurfaceDensitySpec& spec :
         {SurfaceDensitySpec::make(LpNormSurface{3.0}), SurfaceDensitySpec::make(LpNormSurface{1.5}), modulated()}) {
      CAPTURE(surface_kind_name(spec.kind));
      const double C = spec.comparability;
      for (int n = 0; n < 2000; ++n) {
        const Vec3 v(rng.normal(), rng.normal(), rng.normal());
        const double t = rng.uniform(0.1, 5.0);
        const double psi = spec(v);
        CHECK(psi >= v.norm() / C - 1e-12);
        CHECK(psi <= C * v.norm() + 1e-12);
        CHECK(spec(-v) == doctest::Approx(psi).epsilon(1e-13));
        CHECK(spec(t * v) == doctest::Approx(t * psi).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("convexified reduction matches the hull oracle") {
    for (const SurfaceDensitySpec& spec :
         {SurfaceDensitySpec::make(WeightedQuadraticSurface{Vec3(1, 2, 4)}), modulated()}) {
      CAPTURE(surface_kind_name(spec.kind));
      const int m = 360;
      const PlanarSurfaceDensity p = convexify_planar(spec, m);
      std::vector<double> angles, values;
      for (int k = 0; k < m; ++k) {
        const double th = 2.0 * std::numbers::pi * k / m;
        angles.push_back(th);
        values.push_back(oracle::reduced_surface_by_grid(spec, unit(th)));
      }
      double dev = 0.0;
      for (int k = 0; k < 360; ++k) {
        const Vec2 e = unit(2.0 * std::numbers::pi * (k + 0.5) / 360);
        dev = std::max(dev, std::abs(p(e) - oracle::homogeneous_hull(angles, values, e)));
      }
      CHECK(dev <= 1e-5);
    }
  }

  TEST_CASE("planar envelope is convex, even and homogeneous") {
    const PlanarSurfaceDensity p = convexify_planar(modulated(), 720);
    SplitMix64 rng(8);
    for (int n = 0; n < 10000; ++n) {
      const Vec2 a(rng.normal(), rng.normal()), b(rng.normal(), rng.normal());
      const double t = rng.uniform(0.1, 10.0);
      CHECK(p(0.5 * (a + b)) <= 0.5 * (p(a) + p(b)) + 1e-12);
      CHECK(p(-a) == doctest::Approx(p(a)).epsilon(1e-13));
      CHECK(p(t * a) == doctest::Approx(t * p(a)).epsilon(1e-12));
    }
  }

  TEST_CASE("envelope never exceeds the reduced samples") {
    const SurfaceDensitySpec spec = modulated();
    const PlanarSurfaceDensity p = convexify_planar(spec, 720);
    for (int k = 0; k < p.direction_count(); ++k)
      CHECK(p(unit(p.angles()[k])) <= p.reduced_values()[k] + 1e-12);
  }

  TEST_CASE("bad parameters") {
    CHECK_THROWS_AS(SurfaceDensitySpec::make(LpNormSurface{0.5}).validate(), DomainError);
    CHECK_THROWS_AS(SurfaceDensitySpec::make(WeightedQuadraticSurface{Vec3(1, 0, 1)}).validate(), DomainError);
    CHECK_THROWS_AS(convexify_planar(SurfaceDensitySpec{}, 15), DomainError);
    SurfaceDensitySpec s;
    s.comparability = 0.5;
    CHECK_THROWS_AS(s.validate(), DomainError);
  }
}
