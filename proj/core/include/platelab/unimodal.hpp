#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "platelab/params.hpp"
#include "platelab/quartic.hpp"
#include "platelab/spectrum.hpp"

namespace platelab {

// psi(y) = sum_k A_k phi_k(y) over the real basis
//   exp(z1 y), exp(z2 y), exp(Re z3 y) cos(Im z3 y), exp(Re z3 y) sin(Im z3 y),
// each multiplied by exp(-|Re z| ell) so that its sup on [-ell, ell] is at most 1.
struct PsiSolution {
  int m = 1;
  double mu = 0;
  double alpha = 0;
  double ell = 0;
  double sigma = 0;
  QuarticRoots roots;
  std::array<double, 4> A{};

  double basis(int k, double y, int d) const;
  // d-th derivative of psi, d = 0..4.
  double eval(double y, int d = 0) const;
  // Largest |Re z| * ell, used to size quadrature rules.
  double stiffness() const;
};

struct MuWindow {
  double lo = 0.0;
  double hi = 100.0;
  int samples = 400;
};

// Scaled 4x4 free-edge matrix over the PsiSolution basis; rows are
// psi'' - sigma m^2 psi and psi''' - (2 - sigma) m^2 psi' at y = -ell, +ell.
Eigen::Matrix4d boundary_matrix_D(int m, double mu, double alpha, const PlateParams& params);
double boundary_determinant_D(int m, double mu, double alpha, const PlateParams& params);

// mu at which alpha_crit(m, mu) = -|alpha|.
double mu_crit(int m, double alpha);

// All roots of D(m, ., alpha) in the window, intersected with mu >= max(0, -P)
// and the admissible range mu < mu_crit(m, alpha). Ascending.
std::vector<double> solve_mu(int m, double alpha, const PlateParams& params, const MuWindow& window = {});

// Phi(mu, m): the first zero of D(m, mu, .) below alpha_crit(m, mu).
double first_alpha_root(int m, double mu, const PlateParams& params, double max_abs_alpha = 1e7);

struct BranchCurve {
  int m = 1;
  std::vector<double> mu;
  std::vector<double> phi;  // Phi(mu, m) < 0
  bool complete = true;
  std::vector<std::string> diagnostics;

  // Largest increase of Phi between consecutive samples (0 when |Phi| is nondecreasing).
  double monotonicity_violation() const;
};

BranchCurve trace_branch(int m, double mu_lo, double mu_hi, const PlateParams& params, int n_out = 101);

std::string branch_csv(const std::vector<BranchCurve>& curves);

struct ProfileResidual {
  double ode = 0;       // relative sup residual on a y-grid
  double boundary = 0;  // relative residual of the four free-edge conditions
};

struct UnimodalEquilibrium {
  int m = 1;
  double alpha = 0;
  double mu = 0;
  PsiSolution psi;   // normalised so that (pi/2) int psi^2 = 1, i.e. ||U_x||_0 = m
  double amplitude = 0;
  int zero_count = 0;
  ProfileResidual residual;              // nonlinear stationary residual of u
  std::array<double, 4> singular_values{};  // of the scaled D matrix, descending
  bool principal = false;                // mu lies on the first branch Phi(., m)

  // u(y) profile derivative: amplitude * psi^(d)(y).
  double profile(double y, int d = 0) const { return amplitude * psi.eval(y, d); }
  double value(double x, double y) const;
};

// Builds u = sqrt((mu + P)/S) U / ||U_x||_0 on the first branch through alpha.
UnimodalEquilibrium build_unimodal(int m, double alpha, const PlateParams& params,
                                   const MuWindow& window = {});

// Residual of psi'''' - 2m^2 psi'' + m^4 psi + mu m^2 psi - alpha psi' (linear problem).
ProfileResidual psi_residual(const PsiSolution& psi, int grid = 401);
// Residual of the stationary plate equation for u = amplitude psi sin(m x).
ProfileResidual stationary_residual(const UnimodalEquilibrium& U, const PlateParams& params, int grid = 401);

// Sign changes of u along y = argmax|psi| for x on a fine interior grid.
int count_x_zeros(const UnimodalEquilibrium& U, int nx = 2000);

// alpha_bar_m: bisection on "solve_mu nonempty".
double alpha_bar(int m, const PlateParams& params, const MuWindow& window = {}, double rel_tol = 1e-10);

// Modal coefficients (u, w_j) over the given keys (zero for other m).
Eigen::VectorXd unimodal_coefficients(const UnimodalEquilibrium& U, const SpectrumTable& table,
                                      const std::vector<ModeKey>& keys);
// ||u - sum c_j w_j||_{H^2_*}, evaluated directly on the difference.
double unimodal_projection_error(const UnimodalEquilibrium& U, const SpectrumTable& table,
                                 const std::vector<ModeKey>& keys);

}  // namespace platelab
