#include "thinfilm/load.hpp"

#include <cmath>

namespace thinfilm {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

}  // namespace

LoadField LoadField::zero() { return LoadField(); }

LoadField LoadField::constant(const Vec3& value) {
  if (!value.allFinite()) throw DomainError("load: non-finite constant");
  LoadField f;
  f.kind_ = Kind::Constant;
  f.terms_.push_back({value, {0, 0, 0}});
  return f;
}

LoadField LoadField::polynomial(std::vector<LoadTerm> terms) {
  for (const LoadTerm& t : terms) {
    if (!t.coefficient.allFinite()) throw DomainError("load: non-finite coefficient");
    for (int e : t.exponents)
      if (e < 0) throw DomainError("load: negative exponent");
  }
  LoadField f;
  f.kind_ = Kind::Polynomial;
  f.terms_ = std::move(terms);
  return f;
}

Vec3 LoadField::operator()(double x1, double x2, double x3) const {
  Vec3 out = Vec3::Zero();
  for (const LoadTerm& t : terms_)
    out += t.coefficient * (ipow(x1, t.exponents[0]) * ipow(x2, t.exponents[1]) * ipow(x3, t.exponents[2]));
  return out;
}

Vec3 LoadField::transverse_integral(double x1, double x2) const {
  Vec3 out = Vec3::Zero();
  for (const LoadTerm& t : terms_) {
    const int e = t.exponents[2];
    if (e % 2 != 0) continue;
    out += t.coefficient * (ipow(x1, t.exponents[0]) * ipow(x2, t.exponents[1]) * (2.0 / (e + 1)));
  }
  return out;
}

bool LoadField::transverse_uniform() const {
  for (const LoadTerm& t : terms_)
    if (t.exponents[2] != 0 && t.coefficient.squaredNorm() > 0) return false;
  return true;
}

double LoadField::conjugate_exponent(double p) {
  if (!(p > 1)) throw DomainError("load: exponent p must be > 1");
  return p / (p - 1.0);
}

}  // namespace thinfilm
