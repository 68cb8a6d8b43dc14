// thinfilm command line: validate, envelope, solve2d, solve3d, sweep.
//
// Exit codes: 0 pass, 2 verdict/validation failure, 3 configuration error,
// 4 internal solver error.

#include "thinfilm/field_io.hpp"
#include "thinfilm/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace thinfilm;

enum Exit { kPass = 0, kFail = 2, kConfig = 3, kInternal = 4 };

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string convention;
  bool plot = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment file (key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides 'output')");
  cmd->add_option("--seed", c.seed, "base seed (overrides 'seed')");
  cmd->add_option("--convention", c.convention, "volume convention")->check(CLI::IsMember({"lambda", "half-lambda"}));
  cmd->add_flag("--plot", c.plot, "write SVG plots");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig config = c.config.empty() ? parse_config("") : load_config(c.config);
  if (!c.out.empty()) config.output_dir = c.out;
  if (c.seed) config.seed = *c.seed;
  if (!c.convention.empty()) config.convention = parse_convention(c.convention);
  config.validate();
  return config;
}

void write_json(const std::string& dir, const nlohmann::json& doc) {
  std::filesystem::create_directories(dir);
  std::ofstream(std::filesystem::path(dir) / "report.json") << doc.dump(2) << '\n';
}

nlohmann::json restarts_json(const std::vector<RestartRecord>& records) {
  nlohmann::json out = nlohmann::json::array();
  for (const RestartRecord& r : records)
    out.push_back({{"label", r.label}, {"total", r.total}, {"alternations", r.alternations}, {"swaps", r.swaps}});
  return out;
}

int cmd_validate(const ExperimentConfig& config) {
  const ValidationReport report = run_validation(config);
  write_validation_outputs(report, config, config.output_dir);
  for (const Check& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << "  tol=" << c.tolerance << "  "
              << c.detail << '\n';
  return report.passed() ? kPass : kFail;
}

int cmd_envelope(const ExperimentConfig& config) {
  const EnvelopeReport report = run_envelope_tables(config);
  write_envelope_outputs(report, config, config.output_dir);
  for (const EnvelopeSliceResult& s : report.slices) {
    std::cout << "slice " << s.name << ": " << s.phase1.size() << " points";
    if (s.closed_form) std::cout << ", closed-form deviation " << s.max_closed_form_deviation;
    std::cout << '\n';
  }
  return kPass;
}

int cmd_solve2d(const ExperimentConfig& config, bool plot) {
  const LimitProblem problem = make_limit_problem(config);
  const SolveResult r = solve_limit(problem, planar_options(config));
  const std::filesystem::path dir(config.output_dir);
  nlohmann::json doc = {{"kind", "solve2d"},
                        {"energy", to_json(r.energy)},
                        {"fraction", r.state.chi.fraction()},
                        {"exhaustive", r.exhaustive},
                        {"restarts", restarts_json(r.restarts)},
                        {"config", config_json(config)}};
  write_json(config.output_dir, doc);
  write_field((dir / "phase.txt").string(), phase_dump(r.state.chi, config.nx, config.ny));
  write_field((dir / "displacement.txt").string(), displacement_dump(r.state.u, config.nx + 1, config.ny + 1));
  if (plot) std::ofstream(dir / "phase.svg") << svg_phase_layout(r.state.chi, config.nx, config.ny);
  std::cout << "J0 = " << r.energy.total << " (bulk " << r.energy.bulk << ", load " << r.energy.load
            << ", perimeter " << r.energy.perimeter << ")\n";
  return kPass;
}

int cmd_solve3d(const ExperimentConfig& config, double eps, bool plot) {
  const SlabProblem problem = make_slab_problem(config, eps);
  const SlabSolveResult r = minimize_eps(problem, slab_options(config));
  const std::filesystem::path dir(config.output_dir);
  nlohmann::json doc = {{"kind", "solve3d"},
                        {"epsilon", eps},
                        {"energy", to_json(r.solve.energy)},
                        {"fraction", r.solve.state.chi.fraction()},
                        {"diagnostics", to_json(r.diagnostics)},
                        {"restarts", restarts_json(r.solve.restarts)},
                        {"config", config_json(config)}};
  write_json(config.output_dir, doc);
  write_field((dir / "phase.txt").string(), phase_dump(r.solve.state.chi, config.nx, config.ny, config.layers));
  write_field((dir / "displacement.txt").string(),
              displacement_dump(r.solve.state.u, config.nx + 1, config.ny + 1, config.layers + 1));
  if (plot)
    for (int k = 0; k < config.layers; ++k)
      std::ofstream(dir / ("phase_layer" + std::to_string(k) + ".svg"))
          << svg_phase_layout(r.solve.state.chi, config.nx, config.ny, k);
  std::cout << "J_eps(" << eps << ") = " << r.solve.energy.total << '\n';
  return kPass;
}

int cmd_sweep(const ExperimentConfig& config, bool plot) {
  const SweepReport report = run_sweep(config);
  write_sweep_outputs(report, config, config.output_dir, plot);
  std::cout << "J0 = " << report.limit.total << '\n';
  for (const SweepEntry& e : report.entries)
    std::cout << "eps " << e.epsilon << "  J = " << e.energy.total << "  gap = " << e.gap << '\n';
  std::cout << "verdict: " << (report.verdict.passed ? "pass" : "fail") << " (monotone "
            << (report.verdict.monotone ? "yes" : "no") << ", final relative gap " << report.verdict.final_relative_gap
            << ")\n";
  return report.verdict.passed ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thin-film two-phase design: dimension reduction experiments"};
  app.require_subcommand(1);
  Common common;
  std::optional<double> eps;

  auto* validate = app.add_subcommand("validate", "property checks and oracle comparisons");
  auto* envelope = app.add_subcommand("envelope", "envelope brackets on slices");
  auto* solve2d = app.add_subcommand("solve2d", "minimize the limit energy");
  auto* solve3d = app.add_subcommand("solve3d", "minimize the slab energy at one epsilon");
  auto* sweep = app.add_subcommand("sweep", "epsilon sweep against the limit");
  for (auto* cmd : {validate, envelope, solve2d, solve3d, sweep}) add_common(cmd, common);
  solve3d->add_option("--eps", eps, "thickness parameter (default: last configured epsilon)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    const ExperimentConfig config = resolve(common);
    if (*validate) return cmd_validate(config);
    if (*envelope) return cmd_envelope(config);
    if (*solve2d) return cmd_solve2d(config, common.plot);
    if (*solve3d) {
      const double e = eps.value_or(config.epsilons.back());
      if (!(e > 0.0)) throw ConfigError("--eps must be positive");
      return cmd_solve3d(config, e, common.plot);
    }
    return cmd_sweep(config, common.plot);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const StageError& e) {
    std::cerr << "error in " << e.what() << '\n';
    return e.domain() ? kConfig : kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
