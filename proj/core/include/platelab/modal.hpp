#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "platelab/ode.hpp"
#include "platelab/params.hpp"
#include "platelab/spectrum.hpp"

namespace platelab {

struct TruncationSpec {
  std::vector<ModeKey> keys;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double stride = 0.01;  // dense-output sampling interval

  // The n lowest modes of the table.
  static TruncationSpec first_n(const SpectrumTable& table, std::size_t n);
  // All table modes with the given x-frequency and lambda <= max_lambda.
  static TruncationSpec same_m(const SpectrumTable& table, int m, double max_lambda);
  void validate(const SpectrumTable& table) const;
};

struct ModalState {
  double t = 0;
  Eigen::VectorXd h;
  Eigen::VectorXd hdot;
};

struct EnergyReport {
  double E = 0;          // (a(u,u) + |u_t|^2)/2
  double E_plus = 0;     // E + S/4 |u_x|^4
  double script_E = 0;   // E + S/4 |u_x|^4 - P/2 |u_x|^2 - (g,u)
  double V_nu = 0;       // |u_t|^2/2 + a/2 - P/2 |u_x|^2 + S/4 |u_x|^4 + nu (u,u_t)
  double V_nu_k = 0;     // script_E + nu((u_t,u) + k/2 |u|^2)
  double norm_u_H2star_sq = 0;
  double norm_ux_sq = 0;
  double norm_ut_sq = 0;
  double norm_u_sq = 0;
};

// The truncated modal system on a subset of the spectrum table.
class ModalSystem {
public:
  ModalSystem(const PlateParams& params, const SpectrumTable& table, const std::vector<ModeKey>& keys);

  std::size_t size() const { return keys_.size(); }
  const std::vector<ModeKey>& keys() const { return keys_; }
  const std::vector<std::size_t>& table_index() const { return index_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  const Eigen::VectorXd& m2() const { return m2_; }
  const Eigen::VectorXd& g() const { return g_; }
  const Eigen::MatrixXd& upsilon() const { return ups_; }
  const PlateParams& params() const { return params_; }

  // Second derivatives h'' for given (h, h').
  Eigen::VectorXd acceleration(const Eigen::VectorXd& h, const Eigen::VectorXd& hdot) const;
  // First-order form y = [h; h'] for the integrator.
  void rhs(const ode::State& y, ode::State& dy) const;
  EnergyReport energy(const Eigen::VectorXd& h, const Eigen::VectorXd& hdot, double nu) const;
  // (u_y, v) = sum_ij Upsilon_ij h_i v_j
  double coupling(const Eigen::VectorXd& h, const Eigen::VectorXd& v) const;

private:
  PlateParams params_;
  std::vector<ModeKey> keys_;
  std::vector<std::size_t> index_;
  Eigen::VectorXd lambda_, m2_, g_;
  Eigen::MatrixXd ups_;
};

// Time derivatives (h', h'') of a state for the truncation given by the state size
// and keys; convenience wrapper over ModalSystem.
ModalState rhs(const ModalState& state, const PlateParams& params, const SpectrumTable& table,
               const std::vector<ModeKey>& keys);

struct RunMeta {
  PlateParams params;
  TruncationSpec truncation;
  std::uint64_t seed = 0;
  double nu = 0;
  ode::Summary summary;
};

struct Trajectory {
  std::vector<ModalState> samples;
  std::vector<EnergyReport> energies;
  // Running integrals from the first sample: int |u_t|^2 and int (u_y, u_t).
  std::vector<double> dissipation;
  std::vector<double> work;
  RunMeta meta;

  std::size_t size() const { return samples.size(); }
};

struct IntegrateOptions {
  double nu = 0;               // parameter of V_nu and V_nu_k in the reports
  std::uint64_t seed = 0;      // recorded only
  double max_dt = 0;           // 0: unlimited
  // Return false to stop the run early (checked at each sample).
  std::function<bool(const ModalState&)> keep_going;
};

Trajectory integrate(const ModalState& init, double t0, double t1, const TruncationSpec& spec,
                     const PlateParams& params, const SpectrumTable& table,
                     const IntegrateOptions& opt = {});

struct IdentityResidual {
  double max_abs = 0;        // max over all sample pairs (s,t) of |r(s,t)|
  double max_script_E = 0;   // max |script_E| along the run
  std::vector<double> series;  // r(t0, t) per sample
};

IdentityResidual energy_identity_residual(const Trajectory& traj, const PlateParams& params);

std::string trajectory_csv(const Trajectory& traj);

// Y-norm distance sum lambda (h - e)^2 + sum hdot^2 (square root taken).
double y_distance(const ModalSystem& sys, const ModalState& s, const Eigen::VectorXd& e);

}  // namespace platelab
