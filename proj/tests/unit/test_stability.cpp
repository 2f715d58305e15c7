#include <cmath>

#include "catch_amalgamated.hpp"

#include "platelab/equilibria.hpp"
#include "platelab/errors.hpp"
#include "platelab/stability.hpp"

using namespace platelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const SpectrumTable& table() {
  static const SpectrumTable t = find_spectrum(PlateParams{}, 3, 2);
  return t;
}

TruncationSpec six() {
  TruncationSpec tr;
  for (int m = 1; m <= 3; ++m) {
    tr.keys.push_back({m, Parity::even, 1});
    tr.keys.push_back({m, Parity::odd, 1});
  }
  return tr;
}

ModalState state(const Eigen::VectorXd& h, const Eigen::VectorXd& hd) {
  ModalState s;
  s.h = h;
  s.hdot = hd;
  return s;
}

}  // namespace

TEST_CASE("threshold reduction for nu = k/2, delta = k/8") {
  PlateParams p;
  p.k = 0.8;
  p.P = 0.1;
  p.forcing = ForcingSpec::harmonic(0.6, 1);
  const double l1 = table().lambda1, L = l1 - p.P, s2 = 1 - p.sigma * p.sigma;
  REQUIRE(4 * L > p.k * p.k);
  const ThresholdReport r = thresholds(p, l1, {p.k / 2, p.k / 8, 0});
  const double a = r.alpha_bound_general / p.k;
  CHECK_THAT(a * a, WithinRel(s2 * (4 * L - p.k * p.k) / (16 * l1), 1e-13));
  const double g = ModalSystem(p, find_spectrum(p, 3, 2), six().keys).g().norm();
  CHECK_THAT(r.vnu_limsup, WithinRel(4 * g * g / (p.k * p.k), 1e-6));
  CHECK_THAT(r.gamma, WithinRel(p.k / 8, 1e-14));
  CHECK(r.trivial_uniqueness_bound == trivial_uniqueness_threshold(p, l1));
}

TEST_CASE("bounds vanish as P approaches lambda1") {
  PlateParams p;
  p.k = 0.02;
  const double l1 = table().lambda1;
  p.P = l1 * (1 - 1e-10);
  const ThresholdReport r = thresholds(p, l1, {1e-6, 1e-3, 0});
  CHECK(r.alpha_bound_general < 1e-4);
  CHECK(r.trivial_uniqueness_bound < 1e-8);
  CHECK(r.alpha_bound_g0_caseB < 1e-8);
}

TEST_CASE("case (a) and case (b) agree on the boundary k^2 = 2(lambda1 - P)") {
  PlateParams p;
  const double l1 = table().lambda1;
  p.k = std::sqrt(2 * l1 * (1 - 1e-12));
  const ThresholdReport a = thresholds(p, l1, {p.k / 4, p.k / 8, 0});
  p.k = std::sqrt(2 * l1 * (1 + 1e-12));
  const ThresholdReport b = thresholds(p, l1, {p.k / 4, p.k / 8, 0});
  REQUIRE(a.case_a);
  REQUIRE(b.case_b);
  CHECK_THAT(b.nu_caseB, WithinRel(p.k / 2, 1e-5));
  CHECK_THAT(a.alpha_bound_g0_caseA, WithinRel(b.alpha_bound_g0_caseB, 1e-10));
  p.k = 0.5;
  CHECK(std::isnan(thresholds(p, l1, {0.2, 0.1, 0}).alpha_bound_g0_caseB));
}

TEST_CASE("threshold query validation") {
  PlateParams p;
  p.k = 1;
  const double l1 = table().lambda1;
  CHECK_THROWS_AS(thresholds(p, l1, {0.6, 0.1, 0}), InvalidParameter);
  CHECK_THROWS_AS(thresholds(p, l1, {0.4, 0.4, 0}), InvalidParameter);
  CHECK_THROWS_AS(thresholds(p, l1, {0.4, 0.1, 0.9}), InvalidParameter);
  p.k = 0;
  CHECK_THROWS_AS(thresholds(p, l1, {0.1, 0.1, 0}), InvalidParameter);
}

TEST_CASE("asymptotic bounds") {
  PlateParams p;
  const double l1 = table().lambda1;
  const AsymptoticBounds z = asymptotic_bounds(p, l1, 0.2, 0);
  CHECK(z.Psi == 0);
  CHECK(z.ux_bound == 0);
  CHECK(z.H2_bound == 0);
  double prev = 0;
  for (double V : {0.1, 1.0, 10.0, 100.0}) {
    const double Psi = asymptotic_bounds(p, l1, 0.2, V).Psi;
    CHECK(Psi > prev);
    prev = Psi;
  }
  p.S = 1e12;
  CHECK(asymptotic_bounds(p, l1, 0.2, 1.0).Psi < 1e-5);
  CHECK_THROWS_AS(asymptotic_bounds(p, l1, 0.2, -1), InvalidParameter);
}

TEST_CASE("V_nu decays to zero within the case (a) bound with no load") {
  PlateParams p;
  p.k = 0.6;
  const double l1 = table().lambda1;
  const ThresholdQuery q{p.k / 2, p.k / 8, 0};
  p.alpha = -0.9 * thresholds(p, l1, q).alpha_bound_general;
  const Trajectory t =
      integrate(state(Eigen::VectorXd::Constant(6, 0.3), Eigen::VectorXd::Constant(6, -0.2)), 0, 120, six(), p, table());
  const VnuCheck c = verify_vnu_bound(t, table(), q);
  CHECK(c.compliant);
  CHECK(c.pass);
  CHECK(c.min_margin >= -1e-8 * c.scale);
  CHECK(t.energies.back().V_nu < 1e-6 * t.energies.front().V_nu);
}

TEST_CASE("V_nu bound holds with a load and the limsup is respected") {
  PlateParams p;
  p.k = 0.8;
  p.forcing = ForcingSpec::harmonic(0.7, 1);
  const double l1 = table().lambda1;
  const ThresholdQuery q{p.k / 2, p.k / 8, 0};
  p.alpha = -0.5 * thresholds(p, l1, q).alpha_bound_general;
  const SpectrumTable tab = find_spectrum(p, 3, 2);
  IntegrateOptions opt;
  opt.nu = q.nu;
  const Trajectory t = integrate(state(Eigen::VectorXd::Constant(6, 1.0), Eigen::VectorXd::Zero(6)), 0, 150, six(), p,
                                 tab, opt);
  const VnuCheck c = verify_vnu_bound(t, tab, q);
  CHECK(c.compliant);
  CHECK(c.pass);

  // tail of ||u||_0^2 against Psi(V_nu(inf))
  const AsymptoticBounds b = asymptotic_bounds(p, l1, q.nu, c.limsup_bound);
  double tail = 0;
  for (std::size_t i = t.size() / 2; i < t.size(); ++i) tail = std::max(tail, t.energies[i].norm_u_sq);
  CHECK(tail <= 1.05 * b.Psi);
}

TEST_CASE("a gross violation of the alpha bound is flagged non-compliant") {
  PlateParams p;
  p.k = 0.5;
  p.alpha = -400;
  const Trajectory t = integrate(state(Eigen::VectorXd::Constant(6, 0.01), Eigen::VectorXd::Zero(6)), 0, 40, six(), p,
                                 table());
  const VnuCheck c = verify_vnu_bound(t, table(), {p.k / 2, p.k / 8, 0});
  CHECK_FALSE(c.compliant);
  CHECK(c.margin.size() == t.size());
}

TEST_CASE("decay fit matches the linear oscillator rate") {
  PlateParams p;
  p.S = 0;
  TruncationSpec tr;
  tr.keys = {{1, Parity::even, 1}};
  tr.abs_tol = tr.rel_tol = 1e-12;
  for (double k : {0.4, 3.0}) {
    p.k = k;
    const ModalSystem sys(p, table(), tr.keys);
    const Trajectory t = integrate(state(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)), 0, 60, tr, p, table());
    const DecayFit f = fit_decay(t, sys, Eigen::VectorXd::Zero(1));
    const double exact = linear_mode_rate(k, table().lambda1);
    INFO("k=" << k << " eta=" << f.eta << " exact=" << exact << " " << f.reason);
    REQUIRE(f.status == FitStatus::fitted);
    CHECK_THAT(f.eta, WithinRel(exact, 0.05));
  }
}

TEST_CASE("decay fit at an equilibrium is exact") {
  PlateParams p;
  p.k = 0.5;
  TruncationSpec tr;
  tr.keys = six().keys;
  const ModalSystem sys(p, table(), tr.keys);
  const Trajectory t = integrate(state(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(6)), 0, 10, tr, p, table());
  CHECK(fit_decay(t, sys, Eigen::VectorXd::Zero(6)).status == FitStatus::exact_equilibrium);
}

TEST_CASE("decay toward zero in the contractive regime") {
  PlateParams p;
  p.k = 0.8;
  const double l1 = table().lambda1;
  p.alpha = -0.9 * thresholds(p, l1, {p.k / 2, p.k / 8, 0}).alpha_bound_g0_caseA;
  const auto tr = six();
  const ModalSystem sys(p, table(), tr.keys);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Trajectory t = integrate(random_state(sys, 3.0, seed), 0, 60, tr, p, table());
    const DecayFit f = fit_decay(t, sys, Eigen::VectorXd::Zero(6));
    INFO("seed " << seed << " " << f.reason);
    REQUIRE(f.status == FitStatus::fitted);
    CHECK(f.eta > 0);
  }
}

TEST_CASE("sandwich constants bracket V_nu_k on random states") {
  PlateParams p;
  p.k = 1;
  p.alpha = -300;
  p.forcing = ForcingSpec::harmonic(1, 1);
  const SpectrumTable tab = find_spectrum(p, 3, 2);
  const auto tr = six();
  const ModalSystem sys(p, tab, tr.keys);
  const double nu = 0.25;
  const SandwichConstants c = sandwich_constants(sys, tab.lambda1, nu);
  CHECK(c.c0 > 0);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const ModalState y = random_state(sys, 0.1 * double(s + 1), s);
    const EnergyReport e = sys.energy(y.h, y.hdot, nu);
    CHECK(c.c0 * e.E_plus - c.c2 <= e.V_nu_k);
    CHECK(e.V_nu_k <= c.c1 * e.E_plus + c.c2);
  }
  CHECK_THROWS_AS(sandwich_constants(sys, tab.lambda1, 10.0), InvalidParameter);
}

TEST_CASE("random states have the requested Y-norm") {
  const ModalSystem sys(PlateParams{}, table(), six().keys);
  const ModalState s = random_state(sys, 7.5, 3);
  CHECK_THAT(y_distance(sys, s, Eigen::VectorXd::Zero(6)), WithinRel(7.5, 1e-12));
  const ModalState t = random_state(sys, 7.5, 3);
  CHECK(s.h == t.h);
}

TEST_CASE("rest state with no load stays inside the absorbing ball") {
  PlateParams p;
  p.k = 1;
  AbsorbingOptions opt;
  opt.calibration_runs = 2;
  opt.battery_runs = 2;
  opt.norm_lo = opt.norm_hi = 1e-300;
  opt.cal_norm_lo = 0.1;
  opt.cal_norm_hi = 1;
  opt.t_final = 10;
  const AbsorbingBallReport r = absorbing_check(p, table(), six(), opt);
  CHECK(r.pass());
  for (const auto& b : r.battery) CHECK(b.entry_time == 0);
}

TEST_CASE("superlinearity ratio shrinks with the norm") {
  const auto r = superlinearity_ratio(table(), six().keys, {1, 10, 100, 1000}, 200, 1);
  REQUIRE(r.size() == 4);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] < r[i - 1]);
}

namespace {

ModalSystem loaded_system(const SpectrumTable& tab) {
  PlateParams p;
  p.k = 1;
  p.alpha = -300;
  p.forcing = ForcingSpec::harmonic(1, 1);
  return ModalSystem(p, tab, six().keys);
}

}  // namespace

TEST_CASE("gronwall rate matches a central difference of V_nu_k along the flow") {
  const SpectrumTable tab = find_spectrum(PlateParams{}, 3, 2);
  const ModalSystem sys = loaded_system(tab);
  const double nu = 0.25, eta = 0.25, eps = 1e-6;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ModalState y = random_state(sys, 0.5 * double(s + 1), 100 + s);
    const Eigen::VectorXd acc = sys.acceleration(y.h, y.hdot);
    const auto V = [&](double t) { return sys.energy(y.h + t * y.hdot, y.hdot + t * acc, nu).V_nu_k; };
    const double dV = (V(eps) - V(-eps)) / (2 * eps);
    const double expected = dV + eta * V(0);
    CHECK_THAT(gronwall_rate(sys, nu, eta, y), WithinAbs(expected, 1e-5 * (1 + std::abs(V(0)) + std::abs(dV))));
  }
}

TEST_CASE("phase-space supremum dominates the rate and is attained") {
  const SpectrumTable tab = find_spectrum(PlateParams{}, 3, 2);
  const ModalSystem sys = loaded_system(tab);
  const double nu = 0.25, eta = 0.25;
  const GronwallSup a = gronwall_sup(sys, nu, eta, 32, 1);
  const GronwallSup b = gronwall_sup(sys, nu, eta, 32, 2);
  CHECK(a.converged > 0);
  CHECK_THAT(a.C, WithinRel(b.C, 1e-8));
  CHECK_THAT(gronwall_rate(sys, nu, eta, a.argmax), WithinRel(a.C, 1e-9));
  for (std::uint64_t s = 0; s < 500; ++s) {
    const ModalState y = random_state(sys, std::pow(10.0, -1 + 5 * double(s) / 500), s);
    CHECK(gronwall_rate(sys, nu, eta, y) <= a.C);
  }
  CHECK_THROWS_AS(gronwall_sup(sys, nu, 1.2, 4, 0), InvalidParameter);
  CHECK_THROWS_AS(gronwall_sup(sys, 0.9, 0.5, 4, 0), InvalidParameter);
}

TEST_CASE("calibrated estimate stays below the supremum and the battery enters both levels") {
  PlateParams p;
  p.k = 1;
  p.alpha = -300;
  p.forcing = ForcingSpec::harmonic(1, 1);
  const SpectrumTable tab = find_spectrum(p, 3, 2);
  AbsorbingOptions opt;
  opt.calibration_runs = 3;
  opt.battery_runs = 3;
  opt.sup_starts = 16;
  opt.t_final = 40;
  opt.seed = 4;
  const AbsorbingBallReport r = absorbing_check(p, tab, six(), opt);
  CHECK(r.C_trajectories <= r.C);
  CHECK(r.level_empirical <= r.level);
  CHECK(r.pass());
}
