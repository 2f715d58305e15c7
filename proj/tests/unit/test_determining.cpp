#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"

#include "platelab/determining.hpp"
#include "platelab/errors.hpp"

using namespace platelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const SpectrumTable& table() {
  static const SpectrumTable t = find_spectrum(PlateParams{}, 20, 2);
  return t;
}

Eigen::VectorXd trusted_lambda() {
  const auto& t = table();
  Eigen::VectorXd l(Eigen::Index(t.trusted_count()));
  for (Eigen::Index i = 0; i < l.size(); ++i) l(i) = t.modes[std::size_t(i)].lambda;
  return l;
}

TruncationSpec six() {
  TruncationSpec tr;
  for (int m = 1; m <= 3; ++m) {
    tr.keys.push_back({m, Parity::even, 1});
    tr.keys.push_back({m, Parity::odd, 1});
  }
  return tr;
}

}  // namespace

TEST_CASE("modal defect follows lambda_{N+1}^{-1/2} and interpolates in s") {
  const auto& t = table();
  REQUIRE(t.trusted_count() >= 21);
  double prev = INFINITY;
  for (int N = 1; N <= 20; ++N) {
    const DefectReport d = modal_defect(N, t);
    CHECK(d.lambda_next == t.modes[std::size_t(N)].lambda);
    CHECK_THAT(d.eps_L0 * std::sqrt(d.lambda_next), WithinRel(1.0, 1e-15));
    CHECK(d.eps_L0 <= prev);
    prev = d.eps_L0;
    for (double s : {0.0, 0.5, 1.0, 1.5}) {
      const DefectReport ds = modal_defect(N, t, s);
      CHECK_THAT(ds.eps_L_s, WithinRel(std::pow(d.eps_L0, (2 - s) / 2), 1e-14));
    }
  }
  CHECK_THROWS_AS(modal_defect(0, t), InvalidParameter);
  CHECK_THROWS_AS(modal_defect(int(t.trusted_count()), t), InvalidParameter);
  CHECK_THROWS_AS(modal_defect(2, t, 2.0), InvalidParameter);
}

TEST_CASE("defect bound holds on the orthogonal complement") {
  const Eigen::VectorXd lam = trusted_lambda();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N01;
  for (int N = 1; N <= 10; ++N) {
    const double eps = modal_defect(N, table()).eps_L0;
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(lam.size());
      for (Eigen::Index j = N; j < lam.size(); ++j) v(j) = N01(rng);
      CHECK(spectral_norm(v, lam, 0) <= eps * spectral_norm(v, lam, 2) * (1 + 1e-12));
    }
  }
}

TEST_CASE("spectral norms") {
  const Eigen::VectorXd lam = trusted_lambda();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(lam.size());
  v(0) = 3;
  CHECK_THAT(spectral_norm(v, lam, 0), WithinRel(3.0, 1e-15));
  CHECK_THAT(spectral_norm(v, lam, 2), WithinRel(3 * std::sqrt(lam(0)), 1e-15));
}

TEST_CASE("calibrated constant equals the cube-vertex maximum") {
  const Eigen::VectorXd lam = trusted_lambda();
  for (int N : {1, 4, 9}) {
    for (double eta : {0.5, 1.0}) {
      const double C = calibrate_lemma84_constant(lam, N, eta, 64, 3);
      double sum = 0;
      for (int j = 0; j < N; ++j) sum += std::pow(lam(j), (2 - eta) / 2);
      CHECK_THAT(C, WithinRel(std::sqrt(sum), 1e-12));
    }
  }
  CHECK_THROWS_AS(calibrate_lemma84_constant(lam, 0, 1, 4, 0), InvalidParameter);
}

TEST_CASE("interpolation margin is nonnegative on random data") {
  const Eigen::VectorXd lam = trusted_lambda();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N01;
  for (int N : {1, 3, 6, 12}) {
    const double C = calibrate_lemma84_constant(lam, N, 1.0, 32, 1);
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd v(lam.size());
      for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = N01(rng) / std::pow(lam(j), 0.25 * (k % 3));
      CHECK(lemma_8_4_margin(v, lam, N, 1.0, C) >= -1e-12 * spectral_norm(v, lam, 2));
    }
  }
}

TEST_CASE("identical pairs have identically zero differences") {
  PlateParams p;
  p.k = 0.5;
  p.alpha = -300;
  PairSpec ps;
  ps.n_pairs = 3;
  ps.identical = true;
  const DeterminingReport r = determining_experiment(p, table(), six(), {1, 2, 3}, ps, 10);
  for (const auto& o : r.pairs) {
    CHECK(o.z0 == 0.0);
    CHECK(o.final_state == 0.0);
  }
  CHECK(r.n_star == 1);
}

TEST_CASE("contractive regime is consistent for every N") {
  PlateParams p;
  p.k = 1;
  p.alpha = -0.1;
  PairSpec ps;
  ps.n_pairs = 4;
  ps.seed = 2;
  const DeterminingReport r = determining_experiment(p, table(), six(), {1, 2, 3, 4, 5, 6}, ps, 60);
  for (const auto& o : r.pairs) {
    CHECK(o.z0 > 0);
    CHECK(o.state_decays);
  }
  for (bool c : r.consistent) CHECK(c);
  CHECK(r.n_star == 1);
  CHECK(r.order.front() == ModeKey{1, Parity::even, 1});
  const std::string csv = determining_series_csv(r);
  CHECK(csv.rfind("t,state,modal_N1,modal_N2", 0) == 0);
}

TEST_CASE("restricted pairs only carry the listed wavenumbers") {
  PlateParams p;
  p.k = 1;
  PairSpec ps;
  ps.n_pairs = 2;
  ps.restricted_pairs = 2;
  ps.restrict_m = {2};
  ps.norm = 2;
  const DeterminingReport r = determining_experiment(p, table(), six(), {1, 2}, ps, 5);
  // modes 1e1 and 1o1 are never excited, so the N=1 functional is identically zero
  for (double v : r.modal_series[0]) CHECK(v == 0.0);
  CHECK_THAT(r.pairs[0].z0, WithinAbs(r.state_series[0], 1e-12));
}

TEST_CASE("ladder validation") {
  PairSpec ps;
  ps.n_pairs = 1;
  CHECK_THROWS_AS(determining_experiment(PlateParams{}, table(), six(), {7}, ps, 1), InvalidParameter);
  ps.n_pairs = 0;
  CHECK_THROWS_AS(determining_experiment(PlateParams{}, table(), six(), {1}, ps, 1), InvalidParameter);
}
