#include "platelab/params.hpp"

#include <cmath>

#include "platelab/errors.hpp"

namespace platelab {

std::string to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

Parity parity_from_string(const std::string& s) {
  if (s == "even") return Parity::even;
  if (s == "odd") return Parity::odd;
  throw InvalidParameter("parity", "expected 'even' or 'odd', got '" + s + "'");
}

std::string to_string(const ModeKey& key) {
  return "(" + std::to_string(key.m) + "," + to_string(key.parity) + "," +
         std::to_string(key.branch) + ")";
}

ForcingSpec ForcingSpec::constant(double c) {
  ForcingSpec f;
  f.kind = Kind::constant;
  f.c = c;
  return f;
}

ForcingSpec ForcingSpec::harmonic(double c, int m) {
  ForcingSpec f;
  f.kind = Kind::harmonic;
  f.c = c;
  f.m = m;
  return f;
}

ForcingSpec ForcingSpec::modal(std::vector<std::pair<ModeKey, double>> coefficients) {
  ForcingSpec f;
  f.kind = Kind::modal;
  f.coefficients = std::move(coefficients);
  return f;
}

bool ForcingSpec::is_zero() const {
  switch (kind) {
    case Kind::none:
      return true;
    case Kind::constant:
    case Kind::harmonic:
      return c == 0.0;
    case Kind::modal:
      for (const auto& [key, v] : coefficients)
        if (v != 0.0) return false;
      return true;
  }
  return true;
}

void ForcingSpec::validate() const {
  if (!std::isfinite(c)) throw InvalidParameter("forcing.c", "must be finite");
  if (kind == Kind::harmonic && m < 1) throw InvalidParameter("forcing.m", "must be >= 1");
  for (const auto& [key, v] : coefficients) {
    if (key.m < 1 || key.branch < 1)
      throw InvalidParameter("forcing.coefficients", "mode key " + to_string(key) + " is invalid");
    if (!std::isfinite(v)) throw InvalidParameter("forcing.coefficients", "value must be finite");
  }
}

std::string to_string(ForcingSpec::Kind kind) {
  switch (kind) {
    case ForcingSpec::Kind::none: return "none";
    case ForcingSpec::Kind::constant: return "constant";
    case ForcingSpec::Kind::harmonic: return "harmonic";
    case ForcingSpec::Kind::modal: return "modal";
  }
  return "none";
}

ForcingSpec::Kind forcing_kind_from_string(const std::string& s) {
  if (s == "none") return ForcingSpec::Kind::none;
  if (s == "constant") return ForcingSpec::Kind::constant;
  if (s == "harmonic") return ForcingSpec::Kind::harmonic;
  if (s == "modal") return ForcingSpec::Kind::modal;
  throw InvalidParameter("forcing.type", "unknown load type '" + s + "'");
}

void PlateParams::validate() const {
  auto finite = [](const char* name, double v) {
    if (!std::isfinite(v)) throw InvalidParameter(name, "must be finite");
  };
  finite("ell", ell);
  finite("sigma", sigma);
  finite("S", S);
  finite("P", P);
  finite("k", k);
  finite("alpha", alpha);
  if (ell <= 0) throw InvalidParameter("ell", "must be > 0");
  if (sigma < 0 || sigma >= 1) throw InvalidParameter("sigma", "must lie in [0,1)");
  if (S < 0) throw InvalidParameter("S", "must be >= 0");
  if (k < 0) throw InvalidParameter("k", "must be >= 0");
  forcing.validate();
}

void PlateParams::validate_stretching() const {
  validate();
  if (S <= 0) throw InvalidParameter("S", "must be > 0");
}

double forcing_l2_norm(const ForcingSpec& f, const PlateParams& p) {
  using std::numbers::pi;
  switch (f.kind) {
    case ForcingSpec::Kind::none:
      return 0.0;
    case ForcingSpec::Kind::constant:
      return std::abs(f.c) * std::sqrt(2.0 * pi * p.ell);
    case ForcingSpec::Kind::harmonic:
      return std::abs(f.c) * std::sqrt(pi * p.ell);
    case ForcingSpec::Kind::modal: {
      double s = 0;
      for (const auto& [key, v] : f.coefficients) s += v * v;
      return std::sqrt(s);
    }
  }
  return 0.0;
}

}  // namespace platelab
