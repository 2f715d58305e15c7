#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"

#include "platelab/errors.hpp"
#include "platelab/modal.hpp"
#include "platelab/quadrature.hpp"

using namespace platelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const SpectrumTable& table() {
  static const SpectrumTable t = find_spectrum(PlateParams{}, 3, 2);
  return t;
}

std::vector<ModeKey> six() {
  std::vector<ModeKey> k;
  for (int m = 1; m <= 3; ++m) {
    k.push_back({m, Parity::even, 1});
    k.push_back({m, Parity::odd, 1});
  }
  return k;
}

ModalState state(const Eigen::VectorXd& h, const Eigen::VectorXd& hd) {
  ModalState s;
  s.h = h;
  s.hdot = hd;
  return s;
}

}  // namespace

TEST_CASE("rhs reduces to a harmonic oscillator") {
  PlateParams p;
  p.S = 0;
  const std::vector<ModeKey> one = {{1, Parity::even, 1}};
  const ModalState d = rhs(state(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)), p, table(), one);
  CHECK_THAT(d.hdot(0), WithinRel(-table().lambda1, 1e-15));
  CHECK(d.h(0) == 0.0);
}

TEST_CASE("rest state is an equilibrium without load") {
  PlateParams p;
  p.k = 0.3;
  p.alpha = -50;
  const ModalState d = rhs(state(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(6)), p, table(), six());
  CHECK(d.h.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.hdot.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("alpha couples same-m modes of opposite parity") {
  PlateParams p;
  p.S = 0;
  p.alpha = 2.0;
  const std::vector<ModeKey> pair = {{1, Parity::even, 1}, {1, Parity::odd, 1}};
  const ModalSystem sys(p, table(), pair);
  const double u12 = sys.upsilon()(0, 1), u21 = sys.upsilon()(1, 0);
  REQUIRE(std::abs(u12) > 0);
  Eigen::Vector2d h(1.0, 0.0);
  Eigen::VectorXd a = sys.acceleration(h, Eigen::Vector2d::Zero());
  CHECK_THAT(a(1), WithinAbs(p.alpha * u12, 1e-14));
  h << 0.0, 1.0;
  a = sys.acceleration(h, Eigen::Vector2d::Zero());
  CHECK_THAT(a(0), WithinAbs(p.alpha * u21, 1e-14 * std::abs(u21)));
  CHECK_THROWS_AS(rhs(state(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), p, table(), pair), InvalidParameter);
}

TEST_CASE("modal norms agree with direct quadrature") {
  const auto keys = six();
  const ModalSystem sys(PlateParams{}, table(), keys);
  const GaussRule g = gauss_legendre(96, -table().ell, table().ell);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N01;
  for (int s = 0; s < 20; ++s) {
    Eigen::VectorXd h(6);
    for (auto& v : h) v = N01(rng);
    double l2 = 0, ux = 0;
    for (int m = 1; m <= 3; ++m) {
      double acc = 0;
      for (std::size_t q = 0; q < g.x.size(); ++q) {
        double v = 0;
        for (std::size_t j = 0; j < keys.size(); ++j)
          if (keys[j].m == m) v += h(Eigen::Index(j)) * table().modes[table().index_of(keys[j])].psi.eval(g.x[q]);
        acc += g.w[q] * v * v;
      }
      l2 += 0.5 * std::numbers::pi * acc;
      ux += m * m * 0.5 * std::numbers::pi * acc;
    }
    const EnergyReport e = sys.energy(h, Eigen::VectorXd::Zero(6), 0);
    CHECK_THAT(e.norm_u_sq, WithinRel(l2, 1e-8));
    CHECK_THAT(e.norm_ux_sq, WithinRel(ux, 1e-8));
  }
}

TEST_CASE("conservative linear oscillator keeps its energy") {
  PlateParams p;
  p.S = 0;
  TruncationSpec tr;
  tr.keys = {{1, Parity::even, 1}};
  const Trajectory t = integrate(state(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)), 0, 100, tr, p, table());
  const double E0 = t.energies.front().E;
  double drift = 0;
  for (const auto& e : t.energies) drift = std::max(drift, std::abs(e.E - E0));
  CHECK(drift < 1e-8 * E0);
  CHECK_THAT(t.samples.back().t, WithinAbs(100.0, 1e-12));
}

TEST_CASE("damped autonomous run dissipates the energy") {
  PlateParams p;
  p.k = 0.5;
  TruncationSpec tr;
  tr.keys = six();
  Eigen::VectorXd h(6), hd(6);
  h << 2.0, 1e-3, 0.5, -1e-3, 0.1, 0.0;
  hd << 0.0, 0.5, 1.0, 0.0, 0.0, 0.2;
  const Trajectory t = integrate(state(h, hd), 0, 20, tr, p, table());
  for (std::size_t i = 1; i < t.size(); ++i)
    CHECK(t.energies[i].script_E <= t.energies[i - 1].script_E + 1e-9 * std::abs(t.energies[0].script_E));
}

TEST_CASE("tolerance refinement stays within the reported error") {
  PlateParams p;
  p.k = 0.2;
  p.alpha = -30;
  TruncationSpec tr;
  tr.keys = six();
  tr.abs_tol = tr.rel_tol = 1e-8;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(6), hd = Eigen::VectorXd::Zero(6);
  h(0) = 1.0;
  hd(2) = 0.5;
  const Trajectory a = integrate(state(h, hd), 0, 10, tr, p, table());
  TruncationSpec fine = tr;
  fine.abs_tol = fine.rel_tol = 1e-9;
  const Trajectory b = integrate(state(h, hd), 0, 10, fine, p, table());
  const double diff = std::max((a.samples.back().h - b.samples.back().h).cwiseAbs().maxCoeff(),
                               (a.samples.back().hdot - b.samples.back().hdot).cwiseAbs().maxCoeff());
  INFO("diff " << diff << " estimate " << a.meta.summary.error_estimate);
  CHECK(diff < 10 * std::max(a.meta.summary.error_estimate, tr.abs_tol));
}

TEST_CASE("energy identity with flow and load") {
  PlateParams p;
  p.k = 0.1;
  p.alpha = -120;
  p.forcing = ForcingSpec::harmonic(0.7, 1);
  TruncationSpec tr;
  tr.keys = six();
  tr.abs_tol = tr.rel_tol = 1e-11;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(6), hd = Eigen::VectorXd::Zero(6);
  h(0) = 0.3;
  hd(1) = 0.2;
  const Trajectory t = integrate(state(h, hd), 0, 30, tr, p, find_spectrum(p, 3, 2));
  const IdentityResidual r = energy_identity_residual(t, p);
  CHECK(r.max_abs <= 1e-6 * (1 + r.max_script_E));
  bool rises = false, falls = false;
  for (std::size_t i = 1; i < t.size(); ++i) {
    rises = rises || t.energies[i].script_E > t.energies[i - 1].script_E + 1e-6;
    falls = falls || t.energies[i].script_E < t.energies[i - 1].script_E - 1e-6;
  }
  CHECK(rises);
  CHECK(falls);
}

TEST_CASE("energy identity collapses without damping and flow") {
  PlateParams p;
  p.forcing = ForcingSpec::constant(0.4);
  TruncationSpec tr;
  tr.keys = six();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(6);
  h(0) = 0.5;
  const Trajectory t = integrate(state(h, Eigen::VectorXd::Zero(6)), 0, 20, tr, p, find_spectrum(p, 3, 2));
  const IdentityResidual r = energy_identity_residual(t, p);
  CHECK(r.max_abs <= 1e-6 * (1 + r.max_script_E));
}

TEST_CASE("V_nu stays nonnegative under the positivity condition") {
  PlateParams p;
  p.k = 0.4;
  p.alpha = -200;
  TruncationSpec tr;
  tr.keys = six();
  const double nu = 0.9 * std::sqrt(table().lambda1 - p.P);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(6), hd = Eigen::VectorXd::Zero(6);
  h(0) = -1.0;
  hd(0) = 2.0;
  IntegrateOptions opt;
  opt.nu = nu;
  const Trajectory t = integrate(state(h, hd), 0, 30, tr, p, table(), opt);
  for (const auto& e : t.energies) CHECK(e.V_nu >= -1e-12);
}

TEST_CASE("integrator is deterministic and validates input") {
  PlateParams p;
  p.k = 0.3;
  p.alpha = -40;
  TruncationSpec tr;
  tr.keys = six();
  Eigen::VectorXd h = Eigen::VectorXd::Constant(6, 0.1);
  const Trajectory a = integrate(state(h, h), 0, 5, tr, p, table());
  const Trajectory b = integrate(state(h, h), 0, 5, tr, p, table());
  CHECK(trajectory_csv(a) == trajectory_csv(b));
  CHECK_THROWS_AS(integrate(state(h, h), 5, 5, tr, p, table()), InvalidParameter);
  TruncationSpec bad = tr;
  bad.keys.push_back({9, Parity::even, 1});
  CHECK_THROWS_AS(integrate(state(h, h), 0, 1, bad, p, table()), InvalidParameter);
}
