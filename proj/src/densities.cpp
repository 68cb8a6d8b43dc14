#include "thinfilm/densities.hpp"

#include "thinfilm/minimize.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace thinfilm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

void validate_kind(const DensityKind& kind) {
  std::visit(overloaded{
                 [](const IsotropicQuadratic& d) { require(d.alpha > 0, "isotropic-quadratic: alpha must be > 0"); },
                 [](const PowerLaw& d) {
                   require(d.alpha > 0, "p-power: alpha must be > 0");
                   require(d.p > 1, "p-power: exponent must be > 1");
                 },
                 [](const ShiftedQuadratic& d) {
                   require(d.alpha > 0, "shifted-quadratic: alpha must be > 0");
                   require(d.center.allFinite(), "shifted-quadratic: center must be finite");
                 },
                 [](const TwoWell& d) {
                   require(d.alpha > 0, "two-well: alpha must be > 0");
                   require(d.plus.allFinite() && d.minus.allFinite(), "two-well: wells must be finite");
                 },
                 [](const QuarticWell& d) { require(d.radius >= 0, "quartic-well: radius must be >= 0"); },
                 [](const AnisotropicQuartic& d) {
                   require(d.mu > 0 && d.gamma >= 0 && d.rho >= 0 && (d.k.array() >= 0).all(),
                           "anisotropic-quartic: coefficients must be non-negative (mu > 0)");
                 },
                 [](const CustomDensity& d) { require(static_cast<bool>(d.value), "custom density without callable"); },
             },
             kind);
}

double power_norm(const MembraneGradient& m, double p) { return std::pow(m.norm(), p); }

FullGradient finite_difference_gradient(const std::function<double(const FullGradient&)>& f, const FullGradient& F) {
  const double h = 1e-6 * std::max(1.0, F.cwiseAbs().maxCoeff());
  FullGradient grad;
  FullGradient probe = F;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + h;
      const double up = f(probe);
      probe(i, j) = saved - h;
      const double down = f(probe);
      probe(i, j) = saved;
      grad(i, j) = (up - down) / (2 * h);
    }
  }
  return grad;
}

MembraneReduction reduce_numerically(const DensityKind& kind, const GrowthCertificate& growth,
                                     const MembraneGradient& Fbar) {
  const double p = growth.p;
  // Any minimizer satisfies |c|^p <= (beta/beta')(1 + |F̄|^p) + 1.
  const double bound = std::pow(growth.beta_upper / growth.beta_lower * (1.0 + power_norm(Fbar, p)) + 1.0, 1.0 / p);
  const double half = 0.5 * bound;

  Objective objective = [&](const Eigen::VectorXd& c, Eigen::VectorXd& grad) {
    const FullGradient F = compose(Fbar, Vec3(c[0], c[1], c[2]));
    const FullGradient dF = density_gradient(kind, F);
    grad = dF.col(2);
    return density_value(kind, F);
  };

  MinimizeOptions options;
  options.grad_tol = 1e-8;
  options.max_iter = 500;

  MembraneReduction best;
  best.value = std::numeric_limits<double>::infinity();
  for (int corner = 0; corner < 8; ++corner) {
    Eigen::VectorXd start(3);
    for (int axis = 0; axis < 3; ++axis) start[axis] = (corner >> axis & 1) ? half : -half;
    const MinimizeResult run = lbfgs(objective, start, options);
    const bool converged = run.status == MinimizeStatus::Converged;
    const double noise = std::isfinite(best.value) ? 1e-12 * std::max(1.0, std::abs(best.value)) : 0.0;
    if (run.value < best.value - noise || (run.value < best.value && !best.certified)) {
      best.value = run.value;
      best.argmin = Vec3(run.x[0], run.x[1], run.x[2]);
      best.certified = converged;
    } else if (converged && run.value <= best.value + noise) {
      best.certified = true;
    }
  }
  return best;
}

}  // namespace

void BulkDensitySpec::validate() const {
  require(growth.beta_lower > 0, "growth certificate: beta' must be > 0");
  require(growth.beta_upper >= growth.beta_lower, "growth certificate: beta must be >= beta'");
  require(growth.p > 1, "growth certificate: p must be > 1");
  validate_kind(phase1);
  validate_kind(phase2);
}

std::string kind_name(const DensityKind& kind) {
  return std::visit(overloaded{
                        [](const IsotropicQuadratic&) { return std::string("isotropic-quadratic"); },
                        [](const PowerLaw&) { return std::string("p-power"); },
                        [](const ShiftedQuadratic&) { return std::string("shifted-quadratic"); },
                        [](const TwoWell&) { return std::string("two-well"); },
                        [](const QuarticWell&) { return std::string("quartic-well"); },
                        [](const AnisotropicQuartic&) { return std::string("anisotropic-quartic"); },
                        [](const CustomDensity& d) { return d.name; },
                    },
                    kind);
}

bool has_analytic_reduction(const DensityKind& kind) {
  return !std::holds_alternative<AnisotropicQuartic>(kind) && !std::holds_alternative<CustomDensity>(kind);
}

bool reduction_is_convex(const DensityKind& kind) {
  // ((|F̄|^2 - r^2)_+)^2 is convex, so the quartic well relaxes fully under the
  // transverse reduction.
  return std::holds_alternative<IsotropicQuadratic>(kind) || std::holds_alternative<PowerLaw>(kind) ||
         std::holds_alternative<ShiftedQuadratic>(kind) || std::holds_alternative<QuarticWell>(kind);
}

double density_value(const DensityKind& kind, const FullGradient& F) {
  return std::visit(overloaded{
                        [&](const IsotropicQuadratic& d) { return d.alpha * F.squaredNorm(); },
                        [&](const PowerLaw& d) { return d.alpha * std::pow(F.norm(), d.p); },
                        [&](const ShiftedQuadratic& d) { return d.alpha * (F - d.center).squaredNorm(); },
                        [&](const TwoWell& d) {
                          return d.alpha * std::min((F - d.plus).squaredNorm(), (F - d.minus).squaredNorm());
                        },
                        [&](const QuarticWell& d) {
                          const double e = F.squaredNorm() - d.radius * d.radius;
                          return e * e;
                        },
                        [&](const AnisotropicQuartic& d) {
                          const MembraneGradient Fbar = F.leftCols<2>();
                          const Vec3 c = F.col(2);
                          const double wells = c.squaredNorm() - 1.0;
                          const double coupling = c.dot(Fbar * d.m) - d.s;
                          return d.mu * Fbar.squaredNorm() + (d.k.array() * F.array().square().square()).sum() +
                                 d.gamma * wells * wells + d.rho * coupling * coupling;
                        },
                        [&](const CustomDensity& d) { return d.value(F); },
                    },
                    kind);
}

FullGradient density_gradient(const DensityKind& kind, const FullGradient& F) {
  return std::visit(overloaded{
                        [&](const IsotropicQuadratic& d) -> FullGradient { return 2 * d.alpha * F; },
                        [&](const PowerLaw& d) -> FullGradient {
                          const double n = F.norm();
                          if (n == 0.0) return FullGradient::Zero();
                          return d.alpha * d.p * std::pow(n, d.p - 2) * F;
                        },
                        [&](const ShiftedQuadratic& d) -> FullGradient { return 2 * d.alpha * (F - d.center); },
                        [&](const TwoWell& d) -> FullGradient {
                          const bool plus_active = (F - d.plus).squaredNorm() <= (F - d.minus).squaredNorm();
                          return 2 * d.alpha * (F - (plus_active ? d.plus : d.minus));
                        },
                        [&](const QuarticWell& d) -> FullGradient {
                          return 4 * (F.squaredNorm() - d.radius * d.radius) * F;
                        },
                        [&](const AnisotropicQuartic& d) -> FullGradient {
                          const MembraneGradient Fbar = F.leftCols<2>();
                          const Vec3 c = F.col(2);
                          const double coupling = c.dot(Fbar * d.m) - d.s;
                          FullGradient g = (4 * d.k.array() * F.array().cube()).matrix();
                          g.leftCols<2>() += 2 * d.mu * Fbar + 2 * d.rho * coupling * c * d.m.transpose();
                          g.col(2) += 4 * d.gamma * (c.squaredNorm() - 1.0) * c + 2 * d.rho * coupling * (Fbar * d.m);
                          return g;
                        },
                        [&](const CustomDensity& d) -> FullGradient { return finite_difference_gradient(d.value, F); },
                    },
                    kind);
}

double eval_full(const BulkDensitySpec& spec, Phase phase, const FullGradient& F) {
  if (!F.allFinite()) throw DomainError("eval_full: non-finite deformation gradient");
  return density_value(spec.kind(phase), F);
}

MembraneReduction reduce_membrane(const DensityKind& kind, const GrowthCertificate& growth,
                                  const MembraneGradient& Fbar) {
  if (!Fbar.allFinite()) throw DomainError("reduce_membrane: non-finite membrane gradient");
  MembraneReduction r;
  std::visit(overloaded{
                 [&](const IsotropicQuadratic& d) { r.value = d.alpha * Fbar.squaredNorm(); },
                 [&](const PowerLaw& d) { r.value = d.alpha * std::pow(Fbar.norm(), d.p); },
                 [&](const ShiftedQuadratic& d) {
                   r.value = d.alpha * (Fbar - d.center.leftCols<2>()).squaredNorm();
                   r.argmin = d.center.col(2);
                 },
                 [&](const TwoWell& d) {
                   const double dp = (Fbar - d.plus.leftCols<2>()).squaredNorm();
                   const double dm = (Fbar - d.minus.leftCols<2>()).squaredNorm();
                   r.value = d.alpha * std::min(dp, dm);
                   r.argmin = dp <= dm ? Vec3(d.plus.col(2)) : Vec3(d.minus.col(2));
                 },
                 [&](const QuarticWell& d) {
                   const double gap = Fbar.squaredNorm() - d.radius * d.radius;
                   if (gap >= 0) {
                     r.value = gap * gap;
                   } else {
                     r.value = 0.0;
                     r.argmin = Vec3(0.0, 0.0, std::sqrt(-gap));
                   }
                 },
                 [&](const AnisotropicQuartic&) { r = reduce_numerically(kind, growth, Fbar); },
                 [&](const CustomDensity&) { r = reduce_numerically(kind, growth, Fbar); },
             },
             kind);
  return r;
}

MembraneReduction reduce_membrane(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar) {
  return reduce_membrane(spec.kind(phase), spec.growth, Fbar);
}

double eval_membrane(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar) {
  return reduce_membrane(spec, phase, Fbar).value;
}

MembraneGradient membrane_gradient(const BulkDensitySpec& spec, Phase phase, const MembraneGradient& Fbar) {
  const DensityKind& kind = spec.kind(phase);
  return std::visit(overloaded{
                        [&](const IsotropicQuadratic& d) -> MembraneGradient { return 2 * d.alpha * Fbar; },
                        [&](const PowerLaw& d) -> MembraneGradient {
                          const double n = Fbar.norm();
                          if (n == 0.0) return MembraneGradient::Zero();
                          return d.alpha * d.p * std::pow(n, d.p - 2) * Fbar;
                        },
                        [&](const ShiftedQuadratic& d) -> MembraneGradient {
                          return 2 * d.alpha * (Fbar - d.center.leftCols<2>());
                        },
                        [&](const TwoWell& d) -> MembraneGradient {
                          const MembraneGradient ap = d.plus.leftCols<2>();
                          const MembraneGradient am = d.minus.leftCols<2>();
                          const bool plus_active = (Fbar - ap).squaredNorm() <= (Fbar - am).squaredNorm();
                          return 2 * d.alpha * (Fbar - (plus_active ? ap : am));
                        },
                        [&](const QuarticWell& d) -> MembraneGradient {
                          const double gap = Fbar.squaredNorm() - d.radius * d.radius;
                          return gap > 0 ? MembraneGradient(4 * gap * Fbar) : MembraneGradient::Zero();
                        },
                        [&](const auto&) -> MembraneGradient {
                          const MembraneReduction r = reduce_membrane(spec, phase, Fbar);
                          return density_gradient(kind, compose(Fbar, r.argmin)).leftCols<2>();
                        },
                    },
                    kind);
}

MembraneValueGradient membrane_value_gradient(const BulkDensitySpec& spec, Phase phase,
                                              const MembraneGradient& Fbar) {
  const DensityKind& kind = spec.kind(phase);
  if (has_analytic_reduction(kind)) {
    return {reduce_membrane(spec, phase, Fbar).value, membrane_gradient(spec, phase, Fbar)};
  }
  const MembraneReduction r = reduce_membrane(spec, phase, Fbar);
  return {r.value, density_gradient(kind, compose(Fbar, r.argmin)).leftCols<2>()};
}

GrowthReport validate_growth(const BulkDensitySpec& spec, std::size_t sample_count, double radius,
                             std::uint64_t seed) {
  if (sample_count < 1) throw DomainError("validate_growth: sample_count must be >= 1");
  if (!(radius > 0)) throw DomainError("validate_growth: radius must be > 0");
  spec.validate();

  const auto& g = spec.growth;
  GrowthReport report;
  report.samples = sample_count;
  report.worst_margin = std::numeric_limits<double>::infinity();
  SplitMix64 rng(seed);

  auto record = [&](const char* check, const char* phase, double margin, double scale, const auto& point) {
    ++report.checks;
    const double normalized = margin / scale;
    if (normalized < report.worst_margin) {
      report.worst_margin = normalized;
      report.worst_check = std::string(check) + "/" + phase;
    }
    if (margin < -1e-12 * scale) {
      ++report.violations;
      report.passed = false;
      if (!report.witness) {
        GrowthViolation v;
        v.check = check;
        v.phase = phase;
        v.margin = margin;
        for (Eigen::Index i = 0; i < point.rows(); ++i)
          for (Eigen::Index j = 0; j < point.cols(); ++j) v.point.push_back(point(i, j));
        report.witness = v;
      }
    }
  };

  for (std::size_t n = 0; n < sample_count; ++n) {
    const FullGradient F = sample_ball<3, 3>(rng, radius);
    const double fp = std::pow(F.norm(), g.p);
    const double scale = g.beta_upper * (1.0 + fp);
    for (Phase phase : {Phase::One, Phase::Two}) {
      const char* name = phase == Phase::One ? "W1" : "W2";
      const double w = eval_full(spec, phase, F);
      record("H1-lower", name, w - g.beta_lower * (fp - 1.0), scale, F);
      record("H1-upper", name, g.beta_upper * (1.0 + fp) - w, scale, F);
    }

    const MembraneGradient Fbar = sample_ball<3, 2>(rng, radius);
    const double fbp = std::pow(Fbar.norm(), g.p);
    const double mscale = g.beta_upper * (1.0 + fbp);
    const double v1 = eval_membrane(spec, Phase::One, Fbar);
    const double v0 = eval_membrane(spec, Phase::Two, Fbar);
    record("membrane-lower", "chi=1", v1 - g.beta_lower * (fbp - 1.0), mscale, Fbar);
    record("membrane-upper", "chi=1", g.beta_upper * (1.0 + fbp) - v1, mscale, Fbar);
    record("membrane-lower", "chi=0", v0 - g.beta_lower * (fbp - 1.0), mscale, Fbar);
    record("membrane-upper", "chi=0", g.beta_upper * (1.0 + fbp) - v0, mscale, Fbar);
    record("lipschitz-chi", "chi=1|0", 2.0 * g.beta_upper * (1.0 + fbp) - std::abs(v1 - v0), mscale, Fbar);
  }
  return report;
}

}  // namespace thinfilm
