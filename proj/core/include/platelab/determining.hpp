#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "platelab/modal.hpp"

namespace platelab {

// Norms below are spectral: ||v||_s^2 = sum_j lambda_j^{s/2} v_j^2 over table modes,
// so ||.||_0 is the L2 norm and ||.||_2 the H^2_* norm.
struct DefectReport {
  int N = 0;
  double s = 0;
  double lambda_next = 0;  // lambda_{N+1}
  double eps_L0 = 0;       // lambda_{N+1}^{-1/2}
  double eps_L_s = 0;      // eps_L0^{(2-s)/2}, from interpolation between L2 and H^2_*
};

// Requires N + 1 <= trusted modes of the table and 0 <= s < 2.
DefectReport modal_defect(int N, const SpectrumTable& table, double s = 0);

double spectral_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda, double s);

// C(L, eta) = max over calibration samples v in span{e_1..e_N} of ||v||_{2-eta} / max_j |v_j|.
double calibrate_lemma84_constant(const Eigen::VectorXd& lambda, int N, double eta, int samples,
                                  std::uint64_t seed);

// eps_{2-eta} ||v||_2 + C max_{j<=N} |v_j| - ||v||_{2-eta}
double lemma_8_4_margin(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda, int N, double eta, double C);

struct PairSpec {
  int n_pairs = 8;
  double norm = 5.0;         // Y-norm of each initial datum
  std::uint64_t seed = 0;
  bool identical = false;    // both members start from the same datum
  // The first `restricted_pairs` pairs draw data only on modes whose m is in restrict_m.
  int restricted_pairs = 0;
  std::vector<int> restrict_m;
  double decay_tol = 1e-6;   // relative to ||z(0)||_Y
  unsigned threads = 0;
};

struct PairOutcome {
  double z0 = 0;                    // ||z(0)||_Y
  bool state_decays = false;        // (ii)
  std::vector<bool> modal_decays;   // (i) per ladder entry
  std::vector<bool> consistent;     // per ladder entry
  double final_state = 0;           // max of ||z||_Y over the last quarter
};

struct DeterminingReport {
  std::vector<int> ladder;           // N values
  std::vector<ModeKey> order;        // truncation modes sorted by lambda; l_j uses the first N
  std::vector<PairOutcome> pairs;
  std::vector<bool> consistent;      // per ladder entry, over all pairs
  int n_star = -1;                   // smallest N with every N' >= N consistent; -1 if none
  std::vector<double> t;             // first pair: time grid
  std::vector<std::vector<double>> modal_series;  // first pair: max_{j<=N} |l_j(z)| per ladder entry
  std::vector<double> state_series;               // first pair: ||z||_Y
};

DeterminingReport determining_experiment(const PlateParams& params, const SpectrumTable& table,
                                         const TruncationSpec& trunc, const std::vector<int>& ladder,
                                         const PairSpec& pairs, double t_final);

nlohmann::json determining_json(const DeterminingReport& r);
std::string determining_series_csv(const DeterminingReport& r);

}  // namespace platelab
