#pragma once

#include <array>
#include <complex>
#include <string>

namespace platelab {

enum class QuarticClass {
  two_real_pair,  // two distinct real roots and one conjugate pair
  double_root,    // a real double root (tangency boundary)
  no_real,        // two conjugate pairs
  four_real
};

std::string to_string(QuarticClass c);

// Roots of h_m(z) = z^4 - 2 m^2 z^2 - alpha z + m^4 + mu m^2.
// Real roots come first in ascending order; for two_real_pair, z[2] has
// positive imaginary part and z[3] = conj(z[2]).
struct QuarticRoots {
  int m = 1;
  double mu = 0;
  double alpha = 0;
  std::array<std::complex<double>, 4> z{};
  QuarticClass cls = QuarticClass::no_real;
  bool companion_refined = false;

  // Largest relative mismatch between the expanded product and h_m's coefficients.
  double vieta_residual() const;
};

QuarticRoots quartic_roots(int m, double mu, double alpha);

// Critical negative alpha at which h_m acquires a real double root (mu >= 0).
double alpha_crit(int m, double mu);

}  // namespace platelab
