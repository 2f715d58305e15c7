#pragma once

#include <array>
#include <functional>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "platelab/params.hpp"

namespace platelab {

// Position of lambda relative to m^4 in psi'''' - 2m^2 psi'' + (m^4 - lambda) psi = 0.
enum class RootBranch { below, degenerate, above };

std::string to_string(RootBranch b);

struct CharacteristicRoots {
  double r2_plus = 0;   // m^2 + sqrt(lambda)
  double r2_minus = 0;  // m^2 - sqrt(lambda)
  RootBranch branch = RootBranch::below;

  // a = sqrt(r2_plus)
  double big() const;
  // b = sqrt(r2_minus) below m^4, c = sqrt(-r2_minus) above, 0 when degenerate
  double small() const;
};

CharacteristicRoots characteristic_roots(int m, double lambda);

// psi(y) = coef_big * F(y) + coef_small * G(y), where F is the scaled
// hyperbolic function of the large root (cosh or sinh over cosh(a ell)) and G
// is the parity-matched function of the small root:
//   below:      cosh(by)/cosh(b ell)        or sinh(by)/(b cosh(b ell))
//   degenerate: 1                           or y
//   above:      cos(cy)                     or sin(cy)/c
struct PsiProfile {
  int m = 1;
  Parity parity = Parity::even;
  double lambda = 0;
  double ell = 0;
  CharacteristicRoots roots;
  double coef_big = 0;
  double coef_small = 0;

  // d-th derivative, d = 0..4.
  double eval(double y, int d = 0) const;
  std::array<double, 5> derivatives(double y) const;
  double big_basis(double y, int d) const;
  double small_basis(double y, int d) const;
};

struct EigenMode {
  ModeKey key;
  double lambda = 0;
  PsiProfile psi;  // normalised so that (pi/2) * int psi^2 dy = 1
  double l2_norm = 0;  // L2 norm of the raw null-vector profile before scaling

  int m() const { return key.m; }
  // w(x, y) = psi(y) sin(m x)
  double value(double x, double y) const;
};

struct SpectrumOptions {
  int m_max = 5;
  int per_m = 4;          // roots per (m, parity)
  int quad_nodes = 64;    // Gauss-Legendre nodes on (-ell, ell)
  int sweep_refinement = 1;
};

struct SpectrumTable {
  double ell = 0;
  double sigma = 0;
  SpectrumOptions options;
  std::vector<EigenMode> modes;  // ascending lambda, ties by m, even<odd, branch
  double lambda1 = 0;
  // Every eigenvalue of the full problem below this value is in `modes`.
  double trusted_cutoff = 0;
  Eigen::MatrixXd upsilon;   // (d_y w_i, w_j)
  Eigen::VectorXd g_coeffs;  // (g, w_j) for the params' forcing

  std::size_t size() const { return modes.size(); }
  std::size_t trusted_count() const;
  std::optional<std::size_t> find(const ModeKey& key) const;
  std::size_t index_of(const ModeKey& key) const;
};

// Determinant of the 2x2 free-edge system at y = ell for the given parity,
// with rows scaled to unit max-norm. lambda = m^4 uses the degenerate basis.
double free_edge_determinant(int m, double lambda, Parity parity, double ell, double sigma);
double free_edge_determinant(int m, double lambda, Parity parity, const PlateParams& params);

SpectrumTable find_spectrum(const PlateParams& params, const SpectrumOptions& options);
SpectrumTable find_spectrum(const PlateParams& params, int m_max, int per_m);

// Upsilon over all table modes using n Gauss nodes (0: table default).
Eigen::MatrixXd coupling_upsilon(const SpectrumTable& table, int nodes = 0);
Eigen::VectorXd project_forcing(const ForcingSpec& spec, const SpectrumTable& table);

// Integral of f over (-ell, ell) with a Gauss rule sized for the mode content.
double y_integral(const std::function<double(double)>& f, double ell, int nodes);

// (pi/2) * int psi_i^(di) psi_j^(dj) dy for two profiles of equal m.
double y_inner(const PsiProfile& a, int da, const PsiProfile& b, int db, int nodes);

// Bilinear form a(w_i, w_j) by quadrature (zero when m differs).
double a_form(const EigenMode& wi, const EigenMode& wj, double sigma, int nodes);

// (d_y w_i, d_y w_j) over the given table indices.
Eigen::MatrixXd gradient_y_gram(const SpectrumTable& table, std::span<const std::size_t> idx);

struct ModeResidual {
  double ode = 0;       // sup |psi'''' - 2m^2 psi'' + (m^4-lambda) psi| / sup of term sizes
  double boundary = 0;  // both free-edge rows at y = +-ell, same scaling
};

ModeResidual mode_residual(const EigenMode& mode, double sigma, int grid = 401);

std::string spectrum_csv(const SpectrumTable& table);
nlohmann::json modes_json(const SpectrumTable& table);

}  // namespace platelab
