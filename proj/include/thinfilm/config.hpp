#pragma once

#include "thinfilm/densities.hpp"
#include "thinfilm/envelope.hpp"
#include "thinfilm/load.hpp"
#include "thinfilm/solve2d.hpp"
#include "thinfilm/surface.hpp"

#include <optional>
#include <string>
#include <vector>

namespace thinfilm {

/// How the planar volume constraint relates to the slab fraction λ.
enum class Convention { Lambda, HalfLambda };

std::string to_string(Convention c);
Convention parse_convention(const std::string& text);

struct NamedSlice {
  std::string name;
  Slice slice;
};

/// Experiment description read from a `key = value` text file (see
/// docs/config.md for the keys).
struct ExperimentConfig {
  std::string name = "experiment";

  BulkDensitySpec bulk;
  std::string phase1_text = "isotropic-quadratic alpha=1";
  std::string phase2_text = "isotropic-quadratic alpha=2";

  std::optional<SurfaceDensitySpec> surface;  // empty: isotropic perimeter
  std::string surface_text = "isotropic";
  int surface_directions = 720;

  LoadField load;
  std::string load_text = "zero";

  int nx = 16, ny = 16, layers = 4;
  double lx = 1.0, ly = 1.0;

  double lambda = 0.5;
  Convention convention = Convention::Lambda;
  std::vector<double> epsilons{1.0, 0.5, 0.25, 0.125, 0.0625};
  DensityMode density_mode = DensityMode::Raw;

  int alternations = 40;
  std::uint64_t seed = 1;
  int restarts = 3;    // planar seeds seed, seed+1, ...
  int restarts3d = 2;  // slab seeds, in addition to the warm starts
  double u_tol = 1e-9;
  int u_max_iter = 5000;
  double alternation_tol = 1e-10;

  double slack = 0.05;
  double threshold = 0.10;

  std::size_t samples = 10000;
  double radius = 3.0;

  int envelope_grid = 9;
  int laminate_depth = 2;
  int cell_n = 4;
  std::vector<NamedSlice> slices;

  std::string output_dir = "out";

  double planar_fraction() const { return convention == Convention::Lambda ? lambda : 0.5 * lambda; }
  std::vector<std::uint64_t> planar_seeds() const;
  std::vector<std::uint64_t> slab_seeds() const;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Parsers for the individual value syntaxes, exposed for tests.
DensityKind parse_density(const std::string& text);
std::optional<SurfaceDensitySpec> parse_surface(const std::string& text);
LoadField parse_load(const std::string& text);
Slice parse_slice(const std::string& text);

}  // namespace thinfilm
