#pragma once

#include <compare>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace platelab {

enum class Parity { even, odd };

std::string to_string(Parity p);
Parity parity_from_string(const std::string& s);

// Identifies one separated eigenpair psi(y) sin(m x).
struct ModeKey {
  int m = 1;
  Parity parity = Parity::even;
  int branch = 1;

  friend auto operator<=>(const ModeKey&, const ModeKey&) = default;
};

std::string to_string(const ModeKey& key);

struct ForcingSpec {
  enum class Kind { none, constant, harmonic, modal };

  Kind kind = Kind::none;
  double c = 0.0;  // amplitude of the analytic loads
  int m = 1;       // x-frequency of the harmonic load c*sin(m x)
  std::vector<std::pair<ModeKey, double>> coefficients;  // explicit modal load

  static ForcingSpec none() { return {}; }
  static ForcingSpec constant(double c);
  static ForcingSpec harmonic(double c, int m);
  static ForcingSpec modal(std::vector<std::pair<ModeKey, double>> coefficients);

  bool is_zero() const;
  void validate() const;
};

std::string to_string(ForcingSpec::Kind kind);
ForcingSpec::Kind forcing_kind_from_string(const std::string& s);

struct PlateParams {
  double ell = std::numbers::pi / 150.0;
  double sigma = 0.2;
  double S = 1.0;
  double P = 0.0;
  double k = 0.0;
  double alpha = 0.0;
  ForcingSpec forcing;

  // Checks ell > 0, 0 <= sigma < 1, S >= 0, k >= 0 and finiteness.
  void validate() const;
  // Additionally requires S > 0 (needed by the unimodal rescaling and the absorbing ball).
  void validate_stretching() const;
};

// ||g||_0 over the whole plate for the analytic loads; for modal loads the
// Euclidean norm of the coefficients.
double forcing_l2_norm(const ForcingSpec& f, const PlateParams& p);

}  // namespace platelab
