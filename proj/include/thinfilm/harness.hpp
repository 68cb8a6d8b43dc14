#pragma once

#include "thinfilm/config.hpp"
#include "thinfilm/solve3d.hpp"

#include <json.hpp>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace thinfilm {

/// Failure inside one experiment stage. `domain` distinguishes invalid
/// inputs (DomainError) from solver breakdowns.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, bool domain)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), domain_(domain) {}
  const std::string& stage() const { return stage_; }
  bool domain() const { return domain_; }

 private:
  std::string stage_;
  bool domain_;
};

LimitProblem make_limit_problem(const ExperimentConfig& config);
SlabProblem make_slab_problem(const ExperimentConfig& config, double epsilon);
SolveOptions planar_options(const ExperimentConfig& config);
SolveOptions slab_options(const ExperimentConfig& config);

/// θ, Ψ̄(e_θ), Ψ̄**(e_θ) at every sampled direction.
using SurfaceTable = std::vector<std::array<double, 3>>;
SurfaceTable surface_table(const SurfaceDensitySpec& spec, int directions);

struct SweepEntry {
  double epsilon = 0.0;
  EnergyBreakdown energy;
  double gap = 0.0;
  double relative_gap = 0.0;
  CompactnessDiagnostics diagnostics;
  std::vector<RestartRecord> restarts;
  bool polished = false;  // improved by the ε_{k+1} minimizer in the backward pass
  DesignState state;
};

struct Verdict {
  bool monotone = true;
  double final_relative_gap = 0.0;
  bool passed = true;
};

/// gap_{k+1} <= (1 + slack) gap_k + 1e-9 max(1, |J0|) for all k, and the
/// last gap divided by |J0| at most `threshold`.
Verdict sweep_verdict(const std::vector<double>& gaps, double limit_energy, double slack, double threshold);

struct SweepReport {
  std::string name;
  double lambda = 0.0;
  double planar_fraction = 0.0;
  Convention convention = Convention::Lambda;
  bool anisotropic = false;
  EnergyBreakdown limit;
  std::vector<RestartRecord> limit_restarts;
  bool limit_exhaustive = false;
  DesignState limit_state;
  std::vector<SweepEntry> entries;
  Verdict verdict;
  double slack = 0.0, threshold = 0.0;
  SurfaceTable surface;
};

SweepReport run_sweep(const ExperimentConfig& config);

struct Check {
  std::string name;
  bool passed = true;
  double value = 0.0;      // measured discrepancy or worst margin
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;
  bool passed() const;
};

ValidationReport run_validation(const ExperimentConfig& config);

struct EnvelopeSliceResult {
  std::string name;
  Slice slice;
  std::vector<EnvelopeEstimate> phase1, phase2;
  bool closed_form = false;  // both reduced densities convex, so QV̄ = V̄
  double max_closed_form_deviation = 0.0;
};

struct EnvelopeReport {
  int grid = 0;
  std::vector<EnvelopeSliceResult> slices;
  SurfaceTable surface;
};

/// Slices from the config, or the default (F̄11, F̄22) plane through 0.
EnvelopeReport run_envelope_tables(const ExperimentConfig& config);

nlohmann::json to_json(const EnergyBreakdown& e);
nlohmann::json to_json(const CompactnessDiagnostics& d);
nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const EnvelopeReport& r);
nlohmann::json config_json(const ExperimentConfig& config);

/// Writes report.json, CSV tables, field dumps and (optionally) SVG plots
/// into `dir`, creating it when needed.
void write_sweep_outputs(const SweepReport& report, const ExperimentConfig& config, const std::string& dir, bool plot);
void write_validation_outputs(const ValidationReport& report, const ExperimentConfig& config, const std::string& dir);
void write_envelope_outputs(const EnvelopeReport& report, const ExperimentConfig& config, const std::string& dir);

/// Static SVG images.
std::string svg_gap_curve(const SweepReport& report);
std::string svg_phase_layout(const PhaseField& chi, int nx, int ny, int layer = 0);

}  // namespace thinfilm
