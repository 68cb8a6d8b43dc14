#include "thinfilm/field_io.hpp"
#include "thinfilm/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace thinfilm;

namespace {

const char* kSmall = R"(
name = small
phase1 = isotropic-quadratic alpha=1
phase2 = isotropic-quadratic alpha=2
growth.beta_lower = 1
growth.beta_upper = 2
load = constant 0,0,10
mesh.nx = 4
mesh.ny = 4
mesh.layers = 2
epsilons = 1, 0.5
restarts = 2
restarts3d = 1
validation.samples = 200
envelope.grid = 3
envelope.laminate_depth = 1
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("thinfilm_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parses every value syntax") {
    const ExperimentConfig c = parse_config(std::string(kSmall) + R"(
surface = weighted-quadratic weights=1,2,4
convention = half-lambda
lambda = 0.25
slice.a = origin=0,0,0,0,0,0 dir1=1,0,0,0,0,0 dir2=0,0,0,1,0,0 s=-2,2 t=0,1
)");
    CHECK(c.name == "small");
    CHECK(c.nx == 4);
    CHECK(c.convention == Convention::HalfLambda);
    CHECK(c.planar_fraction() == 0.125);
    REQUIRE(c.surface.has_value());
    CHECK(c.surface->comparability == doctest::Approx(2.0));
    REQUIRE(c.slices.size() == 1);
    CHECK(c.slices[0].slice.dir2(1, 1) == 1.0);
    CHECK(c.slices[0].slice.s_min == -2.0);
    CHECK(c.load.transverse_integral(0, 0).z() == doctest::Approx(20.0));
  }

  TEST_CASE("density and load parsers") {
    CHECK(std::get<PowerLaw>(parse_density("p-power alpha=2 p=3")).p == 3.0);
    const auto tw = std::get<TwoWell>(parse_density("two-well alpha=1 plus=1,0,0,0,0,0,0,0,0 minus=-1,0,0,0,0,0,0,0,0"));
    CHECK(tw.minus(0, 0) == -1.0);
    CHECK(std::holds_alternative<AnisotropicQuartic>(parse_density("anisotropic-quartic mu=1 gamma=1 rho=1 s=0.5 m=1,0 k=0.1")));
    CHECK_FALSE(parse_surface("isotropic").has_value());
    const LoadField f = parse_load("polynomial 1,0,0@0,0,2 0,0,1@1,0,0");
    CHECK(f.terms().size() == 2);
    CHECK_THROWS_AS(parse_density("mystery alpha=1"), ConfigError);
    CHECK_THROWS_AS(parse_load("constant 1,2"), ConfigError);
  }

  TEST_CASE("inconsistent configurations are rejected") {
    CHECK_THROWS_AS(parse_config("mesh.nx = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("epsilons = 1, 2"), ConfigError);
    CHECK_THROWS_AS(parse_config("epsilons = 1, -0.5"), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda = 1.5"), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda = 0.3"), ConfigError);
    CHECK_THROWS_AS(parse_config("convention = third"), ConfigError);
    CHECK_THROWS_AS(parse_config("unknown.key = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign"), ConfigError);
    CHECK_THROWS_AS(parse_config("phase1 = two-well alpha=1\ndensity_mode = closed-form"), ConfigError);
    CHECK_THROWS_AS(parse_config("growth.beta_lower = 3"), ConfigError);
  }
}

TEST_SUITE("field_io") {
  TEST_CASE("phase and displacement dumps round-trip") {
    const PhaseField chi = random_phase(2 * 3 * 2, 0.5, 4);
    std::stringstream s;
    write_field(s, phase_dump(chi, 3, 2, 2));
    const FieldDump d = read_field(s);
    CHECK(d.layers == 2);
    CHECK(phase_from_dump(d) == chi);

    Displacement u(3 * 4 * 3);
    for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = 0.1 * k - 1.0 / 3.0;
    std::stringstream t;
    write_field(t, displacement_dump(u, 4, 3));
    const FieldDump e = read_field(t);
    CHECK(e.components == 3);
    REQUIRE(e.values.size() == static_cast<std::size_t>(u.size()));
    for (Eigen::Index k = 0; k < u.size(); ++k) CHECK(e.values[k] == u[k]);
  }

  TEST_CASE("malformed dumps are rejected") {
    std::stringstream s("# thinfilm field\nfield phase\nnx 2\nny 2\ncomponents 1\n1 0\n");
    CHECK_THROWS(read_field(s));
  }
}

TEST_SUITE("harness") {
  TEST_CASE("verdict rule") {
    CHECK(sweep_verdict({1.0, 0.5, 0.2}, -10.0, 0.05, 0.1).passed);
    CHECK(sweep_verdict({1.0, 1.04, 0.5}, -10.0, 0.05, 0.1).passed);
    const Verdict up = sweep_verdict({1.0, 1.2, 0.5}, -10.0, 0.05, 0.1);
    CHECK_FALSE(up.monotone);
    CHECK_FALSE(up.passed);
    const Verdict big = sweep_verdict({3.0, 2.0}, -10.0, 0.05, 0.1);
    CHECK(big.monotone);
    CHECK(big.final_relative_gap == doctest::Approx(0.2));
    CHECK_FALSE(big.passed);
    CHECK(sweep_verdict({0.0, 0.0}, 0.0, 0.05, 0.1).passed);
  }

  TEST_CASE("sweep on a small instance") {
    const ExperimentConfig c = parse_config(kSmall);
    const SweepReport r = run_sweep(c);
    REQUIRE(r.entries.size() == 2);
    CHECK(r.verdict.passed);
    for (const SweepEntry& e : r.entries) {
      CHECK(e.gap >= 0.0);
      CHECK(std::abs(e.energy.total - (e.energy.bulk - e.energy.load + e.energy.perimeter)) <= 1e-12 * std::max(1.0, std::abs(e.energy.total)));
      CHECK(e.energy.total <= r.entries.front().energy.total + 1e-9);
    }
    const nlohmann::json j = to_json(r);
    CHECK(j["entries"].size() == 2);
    CHECK(j["verdict"]["passed"] == true);
  }

  TEST_CASE("degenerate sweep: zero fraction and zero load") {
    ExperimentConfig c = parse_config(std::string(kSmall) + "lambda = 0\nload = zero\n");
    const SweepReport r = run_sweep(c);
    CHECK(r.limit.total == 0.0);
    for (const SweepEntry& e : r.entries) {
      CHECK(e.energy.total == 0.0);
      CHECK(e.gap == 0.0);
    }
    CHECK(r.verdict.passed);
  }

  TEST_CASE("half-lambda convention runs without the extruded warm start") {
    const ExperimentConfig c = parse_config(std::string(kSmall) + "convention = half-lambda\n");
    const SweepReport r = run_sweep(c);
    CHECK(r.planar_fraction == 0.25);
    CHECK(r.limit_state.chi.fraction() == 0.25);
    CHECK(r.entries.back().state.chi.fraction() == 0.5);
  }

  TEST_CASE("stage failures name the stage") {
    ExperimentConfig c = parse_config(kSmall);
    c.density_mode = DensityMode::ClosedForm;
    c.bulk.phase1 = TwoWell{};  // bypasses config validation on purpose
    try {
      (void)make_limit_problem(c);
      FAIL("expected an error");
    } catch (const DomainError&) {
    }
    c = parse_config(kSmall);
    c.epsilons = {1.0, 0.5};
    c.lambda = 0.5;
    c.nx = 3;
    c.ny = 3;  // 9 cells: lambda not representable
    CHECK_THROWS_AS(run_sweep(c), ConfigError);
  }

  TEST_CASE("validation suite passes and catches a corrupted growth constant") {
    const ExperimentConfig c = parse_config(kSmall);
    const ValidationReport ok = run_validation(c);
    for (const Check& check : ok.checks) {
      CAPTURE(check.name);
      CAPTURE(check.detail);
      CHECK(check.passed);
    }
    ExperimentConfig bad = c;
    bad.bulk.growth.beta_lower = 1.5;
    bad.bulk.growth.beta_upper = 2.0;
    const ValidationReport r = run_validation(bad);
    CHECK_FALSE(r.passed());
    CHECK_FALSE(r.checks.front().passed);
    CHECK(r.checks.front().detail.find("first violation") != std::string::npos);
  }

  TEST_CASE("outputs are byte-identical across reruns") {
    const ExperimentConfig c = parse_config(kSmall);
    const auto a = scratch("a"), b = scratch("b");
    write_sweep_outputs(run_sweep(c), c, a.string(), true);
    write_sweep_outputs(run_sweep(c), c, b.string(), true);
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
      ++files;
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    CHECK(files >= 10);
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
  }

  TEST_CASE("envelope tables for the Kohn-Strang pair") {
    const ExperimentConfig c = parse_config(kSmall);
    const EnvelopeReport r = run_envelope_tables(c);
    REQUIRE(r.slices.size() == 1);
    CHECK(r.slices[0].closed_form);
    CHECK(r.slices[0].max_closed_form_deviation <= 1e-6);
    CHECK(r.slices[0].phase1.size() == 9);
  }

  TEST_CASE("svg output is well formed") {
    const PhaseField chi = random_phase(16, 0.5, 1);
    const std::string svg = svg_phase_layout(chi, 4, 4);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
}
