#pragma once

#include <vector>

namespace oracle {

// Rayleigh-Ritz eigenvalues of a(v,v)/||v||_0^2 over {p(y) sin(m x) : deg p < n_basis},
// ascending. Independent of the separated-solution code: the trial space is a
// Legendre polynomial basis orthonormal in L2, and the energy is written as a
// sum of squares so that its square-root factor can be fed to a Jacobi SVD,
// which keeps small eigenvalues relatively accurate despite the thin strip.
std::vector<double> ritz_eigenvalues(int m, double ell, double sigma, int n_basis);

}  // namespace oracle
