#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "platelab/modal.hpp"
#include "platelab/unimodal.hpp"

namespace platelab {

// phi'' + k phi' + m^4 R^2 (phi^3 - phi) = 0
struct DuffingParams {
  int m = 1;
  double k = 0;
  double R2 = 0;

  double stiffness() const { return double(m) * m * m * m * R2; }
  void validate() const;
};

enum class DuffingLimit { minus = -1, zero = 0, plus = 1, undecided = 2 };

std::string to_string(DuffingLimit l);

struct DuffingOptions {
  double tol = 1e-10;
  double stride = 0.01;
  double dwell_radius = 1e-4;
  double dwell_time = 0;   // 0: 10/k
  bool keep_samples = true;
  bool stop_when_decided = true;
};

struct DuffingTrajectory {
  DuffingParams p;
  std::vector<double> t, phi, dphi, energy;
  DuffingLimit limit = DuffingLimit::undecided;
  double decided_at = -1;          // time at which the dwell completed
  // sup_t |E(t) - E(0) + k int_0^t phi'^2| / max(1, |E(0)|), by Simpson on the dense output
  double dissipation_residual = 0;
  // largest increase of the energy between samples (0 for a nonincreasing series)
  double energy_increase = 0;
  double t_end = 0;
};

// R^2 = S int U_x^2 / m^2 by quadrature.
double duffing_r2(const UnimodalEquilibrium& U, const PlateParams& params);

double duffing_energy(const DuffingParams& p, double phi, double dphi);

DuffingTrajectory integrate_duffing(const DuffingParams& p, double phi0, double dphi0, double t_final,
                                    const DuffingOptions& opt = {});

// 2 phi'^2 + m^4 R^2 (phi^4 - 2 phi^2) < 0
bool nonzero_limit_predicate(double phi0, double dphi0, const DuffingParams& p);

struct HeteroclinicMember {
  int n = 1;
  double phi0 = 0;
  double initial_energy = 0;
  DuffingLimit limit = DuffingLimit::undecided;
};

struct HeteroclinicReport {
  std::vector<HeteroclinicMember> members;
  bool all_plus = false;
  bool all_negative_energy = false;
};

HeteroclinicReport heteroclinic_family(const std::vector<int>& n_list, const DuffingParams& p, double t_final,
                                       const DuffingOptions& opt = {});
nlohmann::json heteroclinic_json(const HeteroclinicReport& r);

struct BasinSpec {
  double phi_lo = -2, phi_hi = 2;
  double dphi_lo = -2, dphi_hi = 2;
  int n_phi = 201, n_dphi = 201;
  double t_final = 2000;
  unsigned threads = 0;
};

struct BasinMap {
  BasinSpec spec;
  std::vector<double> phi0, dphi0;
  std::vector<DuffingLimit> label;  // row-major, phi fastest
  int count_minus = 0, count_zero = 0, count_plus = 0, count_undecided = 0;
  int predicate_violations = 0;     // predicate true but limit 0 or the wrong sign
  double max_dissipation_residual = 0;
  double max_energy_increase = 0;
};

BasinMap basin_map(const DuffingParams& p, const BasinSpec& spec, const DuffingOptions& opt = {});
std::string basin_csv(const BasinMap& b);
std::string duffing_csv(const DuffingTrajectory& tr);

struct CrossValidation {
  double projection_error = 0;   // ||u - P_N u||_{H^2_*}
  double discrepancy = 0;        // sup_t Y-distance between Galerkin state and phi(t) P_N u
  double leakage = 0;            // sup_t of |h_j| + |h_j'| over modes with m_j != m
  double tol = 0;
  DuffingLimit duffing_limit = DuffingLimit::undecided;
  DuffingLimit galerkin_limit = DuffingLimit::undecided;
  std::vector<double> t, discrepancy_series;
};

// Runs the full modal system from (phi0 P_N u, dphi0 P_N u) and compares with phi(t) P_N u.
// Refuses (InvalidParameter) when the projection error exceeds max_rel_projection * ||u||_{H^2_*}.
CrossValidation cross_validate_full(const UnimodalEquilibrium& U, double phi0, double dphi0,
                                    const PlateParams& params, const SpectrumTable& table,
                                    const TruncationSpec& trunc, double t_final,
                                    double max_rel_projection = 1e-3);

}  // namespace platelab
