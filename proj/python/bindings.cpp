#include "thinfilm/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace thinfilm;

namespace {

ExperimentConfig config_from(const std::string& text, std::optional<std::uint64_t> seed,
                             std::optional<std::string> convention) {
  ExperimentConfig c = parse_config(text);
  if (seed) c.seed = *seed;
  if (convention) c.convention = parse_convention(*convention);
  c.validate();
  return c;
}

Eigen::MatrixXd phase_grid(const PhaseField& chi, int nx, int ny, int layers) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ny) * std::max(layers, 1), nx);
  for (int r = 0; r < m.rows(); ++r)
    for (int i = 0; i < nx; ++i) m(r, i) = chi.values[static_cast<std::size_t>(r) * nx + i];
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "thin-film two-phase design: reduced densities, envelopes, planar and slab solvers";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def("version", [] {
#ifdef THINFILM_VERSION
    return std::string(THINFILM_VERSION);
#else
    return std::string("0.0.0");
#endif
  });

  m.def(
      "sweep_json",
      [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<std::string> convention) {
        const ExperimentConfig c = config_from(text, seed, convention);
        py::gil_scoped_release release;
        nlohmann::json j = to_json(run_sweep(c));
        j["config"] = config_json(c);
        return j.dump();
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("convention") = py::none());

  m.def(
      "validate_json",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        const ExperimentConfig c = config_from(text, seed, std::nullopt);
        py::gil_scoped_release release;
        return to_json(run_validation(c)).dump();
      },
      py::arg("config"), py::arg("seed") = py::none());

  m.def(
      "envelope_json",
      [](const std::string& text) {
        const ExperimentConfig c = config_from(text, std::nullopt, std::nullopt);
        py::gil_scoped_release release;
        return to_json(run_envelope_tables(c)).dump();
      },
      py::arg("config"));

  m.def(
      "solve_limit",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        const ExperimentConfig c = config_from(text, seed, std::nullopt);
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = solve_limit(make_limit_problem(c), planar_options(c));
        }
        py::dict out;
        out["energy"] = to_json(r.energy).dump();
        out["total"] = r.energy.total;
        out["phase"] = phase_grid(r.state.chi, c.nx, c.ny, 0);
        out["displacement"] = Eigen::VectorXd(r.state.u);
        return out;
      },
      py::arg("config"), py::arg("seed") = py::none());

  m.def(
      "solve_slab",
      [](const std::string& text, double eps, std::optional<std::uint64_t> seed) {
        const ExperimentConfig c = config_from(text, seed, std::nullopt);
        SlabSolveResult r;
        {
          py::gil_scoped_release release;
          r = minimize_eps(make_slab_problem(c, eps), slab_options(c));
        }
        py::dict out;
        out["total"] = r.solve.energy.total;
        out["energy"] = to_json(r.solve.energy).dump();
        out["diagnostics"] = to_json(r.diagnostics).dump();
        out["phase"] = phase_grid(r.solve.state.chi, c.nx, c.ny, c.layers);
        return out;
      },
      py::arg("config"), py::arg("eps"), py::arg("seed") = py::none());

  m.def(
      "reduced_density",
      [](const std::string& density, const MembraneGradient& Fbar, std::array<double, 3> growth) {
        const MembraneReduction r = reduce_membrane(parse_density(density), {growth[0], growth[1], growth[2]}, Fbar);
        return py::make_tuple(r.value, Vec3(r.argmin), r.certified);
      },
      py::arg("density"), py::arg("fbar"), py::arg("growth") = std::array<double, 3>{1.0, 1.0, 2.0},
      "inf over the transverse column c of W(F̄|c); returns (value, argmin, certified)");

  m.def(
      "laminate_upper",
      [](const std::string& density, const MembraneGradient& Fbar, int depth, std::array<double, 3> growth) {
        BulkDensitySpec s;
        s.phase1 = s.phase2 = parse_density(density);
        s.growth = {growth[0], growth[1], growth[2]};
        return laminate_upper(s, Phase::One, Fbar, depth);
      },
      py::arg("density"), py::arg("fbar"), py::arg("depth") = 1,
      py::arg("growth") = std::array<double, 3>{1.0, 1.0, 2.0});

  m.def(
      "planar_surface",
      [](const std::string& surface, const Eigen::VectorXd& angles, int directions) {
        const std::optional<SurfaceDensitySpec> spec = parse_surface(surface);
        const PlanarSurfaceDensity p = convexify_planar(spec.value_or(SurfaceDensitySpec{}), directions);
        Eigen::MatrixXd out(angles.size(), 2);
        for (Eigen::Index k = 0; k < angles.size(); ++k) {
          const Vec2 e(std::cos(angles[k]), std::sin(angles[k]));
          out(k, 0) = surface_reduce(spec.value_or(SurfaceDensitySpec{}), e).value;
          out(k, 1) = p(e);
        }
        return out;
      },
      py::arg("surface"), py::arg("angles"), py::arg("directions") = 720,
      "columns: reduced density and its convex envelope at each angle");

  m.def(
      "sweep_verdict",
      [](const std::vector<double>& gaps, double limit, double slack, double threshold) {
        const Verdict v = sweep_verdict(gaps, limit, slack, threshold);
        return py::make_tuple(v.passed, v.monotone, v.final_relative_gap);
      },
      py::arg("gaps"), py::arg("limit"), py::arg("slack") = 0.05, py::arg("threshold") = 0.10);
}
