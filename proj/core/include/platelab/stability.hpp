#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "platelab/modal.hpp"

namespace platelab {

struct ThresholdQuery {
  double nu = 0;
  double delta = 0;
  double gamma = 0;  // 0: (k - nu)/2 - delta, the split used for the global estimate
};

struct ThresholdReport {
  double lambda1 = 0;
  double gamma = 0;
  double alpha_bound_general = 0;      // sqrt of the right side of the alpha^2 bound
  bool case_a = false;                 // k^2 <= 2(lambda1 - P)
  bool case_b = false;                 // k^2 >= 2(lambda1 - P)
  double alpha_bound_g0_caseA = 0;     // NaN when case (a) does not apply
  double alpha_bound_g0_caseB = 0;     // NaN when case (b) does not apply
  double nu_caseB = 0;                 // NaN when case (b) does not apply
  double vnu_limsup = 0;               // ||g||^2 / (2 nu (k - nu - 2 delta))
  double trivial_uniqueness_bound = 0;
  bool alpha_compliant = false;        // |params.alpha| <= alpha_bound_general
};

// Requires k > 0, 0 <= P < lambda1, 0 < nu <= k/2, 0 < delta < (k - nu)/2, nu^2 <= lambda1 - P.
ThresholdReport thresholds(const PlateParams& params, double lambda1, const ThresholdQuery& q);
nlohmann::json thresholds_json(const ThresholdReport& r);

struct VnuCheck {
  bool compliant = false;   // params satisfy the alpha bound for the query
  bool pass = false;        // all pairwise margins >= -1e-8 * scale
  double min_margin = 0;
  double scale = 0;
  std::vector<double> t, margin;  // for each t, min over s <= t of the margin
  double limsup_bound = 0;
};

// Pairwise check of V_nu(t) <= e^{-nu(t-s)} V_nu(s) + (1 - e^{-nu(t-s)}) ||g||^2/(2 nu (k - nu - 2 delta)).
VnuCheck verify_vnu_bound(const Trajectory& traj, const SpectrumTable& table, const ThresholdQuery& q);
std::string margin_csv(const VnuCheck& c);

struct AsymptoticBounds {
  double Psi = 0;       // limsup ||u||_0^2
  double ux_bound = 0;  // limsup ||u_x||_0^2
  double H2_bound = 0;  // limsup ||u||_{H^2_*}^2
};

AsymptoticBounds asymptotic_bounds(const PlateParams& params, double lambda1, double nu, double Vnu_inf);

enum class FitStatus { fitted, exact_equilibrium, refused };
std::string to_string(FitStatus s);

struct DecayFit {
  FitStatus status = FitStatus::refused;
  double eta = 0;
  double residual = 0;   // RMS of the log-linear fit
  double t_begin = 0, t_end = 0;
  std::size_t n_used = 0;
  std::string reason;
};

struct DecayOptions {
  double tail_fraction = 0.5;
  double floor = 1e-6;            // samples below floor * max distance are dropped
  double monotone_slack = 0.1;    // allowed rise of chunk maxima of log distance
  int chunks = 8;
  double max_residual = 0.5;
};

// Least-squares fit of log ||y(t) - (e, 0)||_Y over the tail window.
DecayFit fit_decay(const Trajectory& traj, const ModalSystem& sys, const Eigen::VectorXd& target,
                   const DecayOptions& opt = {});

// Closed-form decay rate of h'' + k h' + lambda h = 0 measured in the Y-norm.
double linear_mode_rate(double k, double lambda);

struct SandwichConstants {
  double c0 = 0, c1 = 0, c2 = 0;
};

// Explicit constants with c0 E_+ - c2 <= V_{nu,k} <= c1 E_+ + c2 on the modal space.
SandwichConstants sandwich_constants(const ModalSystem& sys, double lambda1, double nu);

// dV_{nu,k}/dt + eta V_{nu,k} along the modal flow at state s.
double gronwall_rate(const ModalSystem& sys, double nu, double eta, const ModalState& s);

struct GronwallSup {
  double C = 0;              // sup over phase space of dV/dt + eta V
  ModalState argmax;
  int starts = 0;
  int converged = 0;
};

// The rate is a concave quadratic in h' (needs nu + eta/2 < k), maximised in closed form;
// the remaining quartic in h (needs S > 0 and eta < 4 nu) is maximised by multi-start Newton ascent.
GronwallSup gronwall_sup(const ModalSystem& sys, double nu, double eta, int starts, std::uint64_t seed,
                         const std::vector<Eigen::VectorXd>& extra_starts = {});

struct AbsorbingOptions {
  double nu = 0.25;
  double eta = 0;          // 0: eta = nu
  int calibration_runs = 12;
  int battery_runs = 20;
  double norm_lo = 0.1, norm_hi = 100;          // battery
  double cal_norm_lo = 0.1, cal_norm_hi = 100;  // calibration; directions are drawn independently of the battery
  double t_final = 60;
  int sup_starts = 64;      // random starts of the phase-space maximisation of dV/dt + eta V
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct AbsorbingRun {
  double initial_norm = 0;
  double V0 = 0;
  double entry_time = -1;   // first sample inside the ball, -1 if never
  double entry_time_empirical = -1;  // first sample with V <= level_empirical, -1 if never
  double V_final = 0;
  bool contained = false;   // all samples after entry stay inside
  double balll_margin = 0;  // min over samples of bound - V
  double sandwich_margin = 0;
};

struct AbsorbingBallReport {
  double nu = 0, eta = 0, C = 0;
  double C_trajectories = 0; // integrated estimate from the calibration runs; cannot exceed C
  double level = 0;          // 1 + C/eta, forward invariant by Gronwall
  double level_empirical = 0;  // 1 + C_trajectories/eta
  bool all_entered_empirical = false;
  SandwichConstants sandwich;
  std::vector<AbsorbingRun> calibration, battery;
  bool all_entered = false, all_contained = false, balll_holds = false, sandwich_holds = false;
  std::string witness;       // first violation, if any

  bool pass() const {
    return all_entered && all_contained && balll_holds && sandwich_holds && all_entered_empirical &&
           C_trajectories <= C * (1 + 1e-9);
  }
};

// Random Y-space data with the given norm (direction drawn from the seed).
ModalState random_state(const ModalSystem& sys, double norm, std::uint64_t seed);

// C(eta) = max eta (V(t) - V(0) e^{-eta t}) / (1 - e^{-eta t}) over the calibration trajectories.
double calibrate_gronwall_constant(const std::vector<Trajectory>& trajs, double eta);

AbsorbingBallReport absorbing_check(const PlateParams& params, const SpectrumTable& table,
                                    const TruncationSpec& trunc, const AbsorbingOptions& opt);
nlohmann::json absorbing_json(const AbsorbingBallReport& r);

// max over random samples of ||u||_1^2 / (a(u,u) + ||u_x||^4) at each H^2_* norm level.
std::vector<double> superlinearity_ratio(const SpectrumTable& table, const std::vector<ModeKey>& keys,
                                         const std::vector<double>& norms, int samples, std::uint64_t seed);

}  // namespace platelab
