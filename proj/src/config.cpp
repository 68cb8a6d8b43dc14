#include "thinfilm/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace thinfilm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a number, got '" + s + "'");
  }
}

long long to_integer(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected an integer, got '" + s + "'");
  }
}

std::vector<double> numbers(const std::string& s, const std::string& what, std::size_t expected = 0) {
  std::vector<double> out;
  for (const std::string& item : split(s, ',')) out.push_back(to_double(item, what));
  if (expected && out.size() != expected)
    throw ConfigError(what + ": expected " + std::to_string(expected) + " comma-separated numbers");
  return out;
}

// "kind key=value key=value" → kind, map
std::pair<std::string, std::map<std::string, std::string>> keyed(const std::string& text) {
  const std::vector<std::string> w = words(text);
  if (w.empty()) throw ConfigError("empty value");
  std::map<std::string, std::string> kv;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const auto eq = w[i].find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + w[i] + "'");
    kv[w[i].substr(0, eq)] = w[i].substr(eq + 1);
  }
  return {w[0], kv};
}

class Fields {
 public:
  Fields(std::string owner, std::map<std::string, std::string> kv) : owner_(std::move(owner)), kv_(std::move(kv)) {}
  double number(const std::string& key, double fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const double v = to_double(it->second, owner_ + "." + key);
    kv_.erase(it);
    return v;
  }
  std::optional<std::vector<double>> list(const std::string& key, std::size_t expected) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    auto v = numbers(it->second, owner_ + "." + key, expected);
    kv_.erase(it);
    return v;
  }
  void done() const {
    if (!kv_.empty()) throw ConfigError(owner_ + ": unknown parameter '" + kv_.begin()->first + "'");
  }

 private:
  std::string owner_;
  std::map<std::string, std::string> kv_;
};

FullGradient matrix3(const std::vector<double>& v) {
  FullGradient m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v[3 * i + j];
  return m;
}

MembraneGradient matrix32(const std::vector<double>& v) {
  MembraneGradient m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = v[2 * i + j];
  return m;
}

}  // namespace

std::string to_string(Convention c) { return c == Convention::Lambda ? "lambda" : "half-lambda"; }

Convention parse_convention(const std::string& text) {
  if (text == "lambda") return Convention::Lambda;
  if (text == "half-lambda") return Convention::HalfLambda;
  throw ConfigError("convention must be 'lambda' or 'half-lambda', got '" + text + "'");
}

DensityKind parse_density(const std::string& text) {
  auto [kind, kv] = keyed(text);
  Fields f(kind, kv);
  DensityKind out;
  if (kind == "isotropic-quadratic") {
    out = IsotropicQuadratic{f.number("alpha", 1.0)};
  } else if (kind == "p-power") {
    out = PowerLaw{f.number("alpha", 1.0), f.number("p", 2.0)};
  } else if (kind == "shifted-quadratic") {
    ShiftedQuadratic d;
    d.alpha = f.number("alpha", 1.0);
    if (auto c = f.list("center", 9)) d.center = matrix3(*c);
    out = d;
  } else if (kind == "two-well") {
    TwoWell d;
    d.alpha = f.number("alpha", 1.0);
    if (auto p = f.list("plus", 9)) d.plus = matrix3(*p);
    if (auto m = f.list("minus", 9)) d.minus = matrix3(*m);
    out = d;
  } else if (kind == "quartic-well") {
    out = QuarticWell{f.number("radius", 1.0)};
  } else if (kind == "anisotropic-quartic") {
    AnisotropicQuartic d;
    d.mu = f.number("mu", d.mu);
    d.gamma = f.number("gamma", d.gamma);
    d.rho = f.number("rho", d.rho);
    d.s = f.number("s", d.s);
    if (auto m = f.list("m", 2)) d.m = Vec2((*m)[0], (*m)[1]);
    if (auto k = f.list("k", 0)) {
      if (k->size() == 1) d.k = Eigen::Matrix3d::Constant((*k)[0]);
      else if (k->size() == 9) d.k = matrix3(*k);
      else throw ConfigError("anisotropic-quartic.k: expected 1 or 9 numbers");
    }
    out = d;
  } else {
    throw ConfigError("unknown density kind '" + kind + "'");
  }
  f.done();
  return out;
}

std::optional<SurfaceDensitySpec> parse_surface(const std::string& text) {
  auto [kind, kv] = keyed(text);
  Fields f(kind, kv);
  if (kind == "isotropic") {
    f.done();
    return std::nullopt;
  }
  const double comparability = f.number("comparability", 0.0);
  SurfaceKind sk;
  if (kind == "euclidean") {
    sk = EuclideanSurface{};
  } else if (kind == "weighted-quadratic") {
    WeightedQuadraticSurface s;
    if (auto w = f.list("weights", 3)) s.weights = Vec3((*w)[0], (*w)[1], (*w)[2]);
    sk = s;
  } else if (kind == "lp-norm") {
    sk = LpNormSurface{f.number("q", 2.0)};
  } else if (kind == "angular-modulated") {
    const double amplitude = f.number("amplitude", 0.4);
    const double lobes = f.number("lobes", 4.0);
    const int n_theta = static_cast<int>(f.number("n_theta", 72));
    const int n_z = static_cast<int>(f.number("n_z", 37));
    if (!(std::abs(amplitude) < 1.0)) throw ConfigError("angular-modulated.amplitude must lie in (-1, 1)");
    try {
      sk = AngularModulatedSurface{AngularProfile::tabulate(n_theta, n_z, [&](double theta, double z) {
        return 1.0 + amplitude * std::cos(lobes * theta) * (1.0 - z * z);
      })};
    } catch (const DomainError& e) {
      throw ConfigError(std::string("angular-modulated: ") + e.what());
    }
  } else {
    throw ConfigError("unknown surface kind '" + kind + "'");
  }
  f.done();
  SurfaceDensitySpec spec;
  spec.kind = sk;
  spec.comparability = comparability > 0 ? comparability : SurfaceDensitySpec::default_comparability(sk);
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

LoadField parse_load(const std::string& text) {
  const std::vector<std::string> w = words(text);
  if (w.empty()) throw ConfigError("load: empty value");
  if (w[0] == "zero") {
    if (w.size() != 1) throw ConfigError("load: 'zero' takes no arguments");
    return LoadField::zero();
  }
  if (w[0] == "constant") {
    if (w.size() != 2) throw ConfigError("load: expected 'constant f1,f2,f3'");
    const auto v = numbers(w[1], "load", 3);
    return LoadField::constant(Vec3(v[0], v[1], v[2]));
  }
  if (w[0] == "polynomial") {
    std::vector<LoadTerm> terms;
    for (std::size_t i = 1; i < w.size(); ++i) {
      const auto at = w[i].find('@');
      if (at == std::string::npos) throw ConfigError("load: polynomial term must read c1,c2,c3@e1,e2,e3");
      const auto c = numbers(w[i].substr(0, at), "load coefficient", 3);
      const auto e = numbers(w[i].substr(at + 1), "load exponent", 3);
      LoadTerm t;
      t.coefficient = Vec3(c[0], c[1], c[2]);
      for (int k = 0; k < 3; ++k) {
        if (e[k] < 0 || e[k] != std::floor(e[k])) throw ConfigError("load: exponents must be non-negative integers");
        t.exponents[k] = static_cast<int>(e[k]);
      }
      terms.push_back(t);
    }
    return LoadField::polynomial(std::move(terms));
  }
  throw ConfigError("unknown load kind '" + w[0] + "'");
}

Slice parse_slice(const std::string& text) {
  Slice s;
  for (const std::string& w : words(text)) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) throw ConfigError("slice: expected key=value, got '" + w + "'");
    const std::string key = w.substr(0, eq), value = w.substr(eq + 1);
    if (key == "origin") s.origin = matrix32(numbers(value, "slice.origin", 6));
    else if (key == "dir1") s.dir1 = matrix32(numbers(value, "slice.dir1", 6));
    else if (key == "dir2") s.dir2 = matrix32(numbers(value, "slice.dir2", 6));
    else if (key == "s") {
      const auto r = numbers(value, "slice.s", 2);
      s.s_min = r[0];
      s.s_max = r[1];
    } else if (key == "t") {
      const auto r = numbers(value, "slice.t", 2);
      s.t_min = r[0];
      s.t_max = r[1];
    } else {
      throw ConfigError("slice: unknown key '" + key + "'");
    }
  }
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

std::vector<std::uint64_t> ExperimentConfig::planar_seeds() const {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < restarts; ++k) out.push_back(seed + static_cast<std::uint64_t>(k));
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::slab_seeds() const {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < restarts3d; ++k) out.push_back(seed + 1000 + static_cast<std::uint64_t>(k));
  return out;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  try {
    bulk.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  require(nx >= 2 && ny >= 2, "mesh.nx and mesh.ny must be >= 2");
  require(layers >= 1, "mesh.layers must be >= 1");
  require(lx > 0 && ly > 0, "mesh.lx and mesh.ly must be > 0");
  require(lambda >= 0 && lambda <= 1, "lambda must lie in [0, 1]");
  require(!epsilons.empty(), "epsilons must not be empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    require(epsilons[i] > 0, "epsilons must be positive");
    if (i) require(epsilons[i] < epsilons[i - 1], "epsilons must be strictly decreasing");
  }
  require(alternations >= 1, "alternations must be >= 1");
  require(restarts >= 1, "restarts must be >= 1");
  require(restarts3d >= 0, "restarts3d must be >= 0");
  require(u_tol > 0 && u_max_iter >= 1, "u.tol must be > 0 and u.max_iter >= 1");
  require(slack >= 0 && threshold >= 0, "verdict.slack and verdict.threshold must be >= 0");
  require(samples >= 1 && radius > 0, "validation.samples must be >= 1 and validation.radius > 0");
  require(envelope_grid >= 2 && envelope_grid <= 257, "envelope.grid must lie in [2, 257]");
  require(laminate_depth == 1 || laminate_depth == 2, "envelope.laminate_depth must be 1 or 2");
  require(cell_n >= 1, "envelope.cell_n must be >= 1");
  require(surface_directions >= 16 && surface_directions % 2 == 0, "surface.directions must be even and >= 16");
  auto representable = [](double fraction, long long cells) {
    const double exact = fraction * static_cast<double>(cells);
    return std::abs(exact - std::round(exact)) <= 1e-9;
  };
  require(representable(planar_fraction(), static_cast<long long>(nx) * ny),
          "planar target fraction " + std::to_string(planar_fraction()) + " is not representable on the " +
              std::to_string(nx) + "x" + std::to_string(ny) + " mesh");
  require(representable(lambda, static_cast<long long>(nx) * ny * layers),
          "lambda is not representable on the slab mesh");
  if (density_mode == DensityMode::ClosedForm)
    require(reduction_is_convex(bulk.phase1) && reduction_is_convex(bulk.phase2),
            "density_mode closed-form needs convex reduced densities");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  c.bulk.phase1 = IsotropicQuadratic{1.0};
  c.bulk.phase2 = IsotropicQuadratic{2.0};
  c.bulk.growth = {1.0, 2.0, 2.0};

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = "line " + std::to_string(lineno) + " (" + key + ")";
    try {
      if (key == "name") c.name = value;
      else if (key == "phase1") {
        c.bulk.phase1 = parse_density(value);
        c.phase1_text = value;
      } else if (key == "phase2") {
        c.bulk.phase2 = parse_density(value);
        c.phase2_text = value;
      } else if (key == "growth.beta_lower") c.bulk.growth.beta_lower = to_double(value, key);
      else if (key == "growth.beta_upper") c.bulk.growth.beta_upper = to_double(value, key);
      else if (key == "growth.p") c.bulk.growth.p = to_double(value, key);
      else if (key == "surface") {
        c.surface = parse_surface(value);
        c.surface_text = value;
      } else if (key == "surface.directions") c.surface_directions = static_cast<int>(to_integer(value, key));
      else if (key == "load") {
        c.load = parse_load(value);
        c.load_text = value;
      } else if (key == "mesh.nx") c.nx = static_cast<int>(to_integer(value, key));
      else if (key == "mesh.ny") c.ny = static_cast<int>(to_integer(value, key));
      else if (key == "mesh.layers") c.layers = static_cast<int>(to_integer(value, key));
      else if (key == "mesh.lx") c.lx = to_double(value, key);
      else if (key == "mesh.ly") c.ly = to_double(value, key);
      else if (key == "lambda") c.lambda = to_double(value, key);
      else if (key == "convention") c.convention = parse_convention(value);
      else if (key == "epsilons") c.epsilons = numbers(value, key);
      else if (key == "density_mode") c.density_mode = parse_density_mode(value);
      else if (key == "alternations") c.alternations = static_cast<int>(to_integer(value, key));
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_integer(value, key));
      else if (key == "restarts") c.restarts = static_cast<int>(to_integer(value, key));
      else if (key == "restarts3d") c.restarts3d = static_cast<int>(to_integer(value, key));
      else if (key == "u.tol") c.u_tol = to_double(value, key);
      else if (key == "u.max_iter") c.u_max_iter = static_cast<int>(to_integer(value, key));
      else if (key == "alternation.tol") c.alternation_tol = to_double(value, key);
      else if (key == "verdict.slack") c.slack = to_double(value, key);
      else if (key == "verdict.threshold") c.threshold = to_double(value, key);
      else if (key == "validation.samples") c.samples = static_cast<std::size_t>(to_integer(value, key));
      else if (key == "validation.radius") c.radius = to_double(value, key);
      else if (key == "envelope.grid") c.envelope_grid = static_cast<int>(to_integer(value, key));
      else if (key == "envelope.laminate_depth") c.laminate_depth = static_cast<int>(to_integer(value, key));
      else if (key == "envelope.cell_n") c.cell_n = static_cast<int>(to_integer(value, key));
      else if (key.rfind("slice.", 0) == 0) c.slices.push_back({key.substr(6), parse_slice(value)});
      else if (key == "output") c.output_dir = value;
      else throw ConfigError("unknown key");
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const DomainError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace thinfilm
