#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "platelab/modal.hpp"

namespace platelab {

struct NewtonEquilibrium {
  Eigen::VectorXd h;
  double residual = 0;           // ||F(h)|| / (1 + ||lambda h|| + ||g||)
  Eigen::VectorXcd spectrum;     // eigenvalues of the linearisation, ascending modulus
  bool hyperbolic = false;
  int iterations = 0;
  int hits = 1;                  // starts that converged here
};

struct NewtonOptions {
  int n_starts = 100;
  std::uint64_t seed = 0;
  double radius = 0;       // H^2_* radius of the start ball; 0 picks it from the a-priori bound or unimodal amplitudes
  int max_iter = 60;
  double tol = 1e-10;
  double dedup = 1e-6;
  double hyperbolic_margin = 1e-8;
  unsigned threads = 0;
};

struct NewtonReport {
  std::vector<NewtonEquilibrium> equilibria;  // sorted by H^2_* norm
  int converged = 0;
  int discarded = 0;
  double radius = 0;
};

// F(h) = lambda h + m^2 (S |u_x|^2 - P) h - alpha Upsilon^T h - g.
Eigen::VectorXd stationary_map(const ModalSystem& sys, const Eigen::VectorXd& h);
// Analytic Jacobian of F: the modal form of
// Delta^2 v + [P - S|e_x|^2] v_xx - 2S (v_x, e_x) e_xx - alpha v_y.
Eigen::MatrixXd linearization(const ModalSystem& sys, const Eigen::VectorXd& e);
// Central-difference Jacobian of F.
Eigen::MatrixXd fd_jacobian(const ModalSystem& sys, const Eigen::VectorXd& h);

// Newton from one start; returns false when it does not converge.
bool newton_solve(const ModalSystem& sys, Eigen::VectorXd& h, const NewtonOptions& opt, int* iterations = nullptr);

NewtonEquilibrium classify_equilibrium(const ModalSystem& sys, const Eigen::VectorXd& h, const NewtonOptions& opt);

NewtonReport newton_equilibria(const PlateParams& params, const SpectrumTable& table, const TruncationSpec& trunc,
                               const NewtonOptions& opt = {});

// Default start radius: a-priori bound when g != 0 and it is finite, otherwise
// 1.5 times the largest Galerkin unimodal H^2_* norm (or sqrt(lambda_1) if none).
double newton_start_radius(const ModalSystem& sys, double lambda1);

// (lambda1 - P) sqrt(2(1 - sigma^2)) / sqrt(lambda1); requires 0 <= P < lambda1.
double trivial_uniqueness_threshold(const PlateParams& params, double lambda1);

// sqrt(2(1-sigma^2)) ||g|| / ((lambda1-P) sqrt(2(1-sigma^2)) - |alpha| sqrt(lambda1)); +inf when the
// denominator is not positive.
double apriori_bound(const PlateParams& params, double lambda1, double g_norm);

nlohmann::json equilibria_json(const NewtonReport& rep, const ModalSystem& sys);

}  // namespace platelab
