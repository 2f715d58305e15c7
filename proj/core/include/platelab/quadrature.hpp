#pragma once

#include <vector>

namespace platelab {

struct GaussRule {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // weights
};

// n-point Gauss-Legendre rule on [-1, 1]; rules are cached and thread-safe.
const GaussRule& gauss_legendre(int n);

// The n-point rule mapped onto [a, b].
GaussRule gauss_legendre(int n, double a, double b);

}  // namespace platelab
