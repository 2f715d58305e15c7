#include <cmath>

#include "catch_amalgamated.hpp"

#include "platelab/duffing.hpp"
#include "platelab/errors.hpp"
#include "platelab/quadrature.hpp"

using namespace platelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const UnimodalEquilibrium& u1() {
  static const UnimodalEquilibrium U = build_unimodal(1, -400, PlateParams{});
  return U;
}

DuffingParams dp(double k = 0.5) {
  DuffingParams p;
  p.m = 1;
  p.k = k;
  p.R2 = duffing_r2(u1(), PlateParams{});
  return p;
}

}  // namespace

TEST_CASE("R2 is positive, quadratic in U and resolved by quadrature") {
  const PlateParams p;
  const double r2 = duffing_r2(u1(), p);
  CHECK(r2 > 0);
  UnimodalEquilibrium twice = u1();
  twice.amplitude *= 2;
  CHECK_THAT(duffing_r2(twice, p), WithinRel(4 * r2, 1e-12));
  // U_x integral over (0,pi)x(-l,l) is m^2 (pi/2) amplitude^2 int psi^2
  const GaussRule g = gauss_legendre(400, -p.ell, p.ell);
  double acc = 0;
  for (std::size_t q = 0; q < g.x.size(); ++q) acc += g.w[q] * std::pow(u1().profile(g.x[q]), 2);
  CHECK_THAT(r2, WithinRel(p.S * 0.5 * M_PI * acc, 1e-10));
}

TEST_CASE("constant solutions stay put") {
  const DuffingParams p = dp();
  for (double phi : {-1.0, 0.0, 1.0}) {
    DuffingOptions opt;
    opt.stop_when_decided = false;
    const DuffingTrajectory t = integrate_duffing(p, phi, 0, 20, opt);
    for (double v : t.phi) CHECK_THAT(v, WithinAbs(phi, 1e-12));
  }
  CHECK(integrate_duffing(p, 1, 0, 100).limit == DuffingLimit::plus);
}

TEST_CASE("damped runs settle on one of three limits with decreasing energy") {
  const DuffingParams p = dp();
  for (double phi0 : {0.5, -0.5, 1.7, -1.9}) {
    for (double dphi0 : {0.0, 1.5, -2.0}) {
      const DuffingTrajectory t = integrate_duffing(p, phi0, dphi0, 200);
      INFO("phi0=" << phi0 << " dphi0=" << dphi0);
      CHECK(t.limit != DuffingLimit::undecided);
      CHECK(t.energy_increase <= 1e-7);
      CHECK(t.dissipation_residual < 1e-7);
    }
  }
}

TEST_CASE("nonzero-limit predicate") {
  const DuffingParams p = dp();
  for (int n = 1; n <= 20; ++n) CHECK(nonzero_limit_predicate(1.0 / n, 0, p));
  CHECK_FALSE(nonzero_limit_predicate(0, 0.3, p));
  CHECK_FALSE(nonzero_limit_predicate(0, 0, p));
  CHECK_FALSE(nonzero_limit_predicate(2, 0, p));
  for (double phi0 : {0.3, -0.3, 0.9, -1.2})
    if (nonzero_limit_predicate(phi0, 0.1, p)) {
      const DuffingTrajectory t = integrate_duffing(p, phi0, 0.1, 200);
      CHECK(int(t.limit) == (phi0 > 0 ? 1 : -1));
    }
}

TEST_CASE("heteroclinic family from small data") {
  const DuffingParams p = dp();
  std::vector<int> ns;
  for (int n = 1; n <= 10; ++n) ns.push_back(n);
  const HeteroclinicReport r = heteroclinic_family(ns, p, 2000);
  REQUIRE(r.members.size() == 10);
  CHECK(r.all_plus);
  CHECK(r.all_negative_energy);
  for (std::size_t i = 1; i < r.members.size(); ++i) CHECK(r.members[i].phi0 < r.members[i - 1].phi0);
}

TEST_CASE("basin map labels respect the predicate") {
  const DuffingParams p = dp();
  BasinSpec s;
  s.n_phi = s.n_dphi = 21;
  s.t_final = 2000;
  const BasinMap b = basin_map(p, s);
  CHECK(b.label.size() == 441);
  CHECK(b.count_undecided == 0);
  CHECK(b.predicate_violations == 0);
  CHECK(b.count_minus == b.count_plus);
  CHECK(b.max_dissipation_residual < 1e-7);
  CHECK(basin_csv(b).rfind("phi0,dphi0,label\n", 0) == 0);
}

TEST_CASE("full Galerkin run follows phi(t) U and leaks nothing") {
  PlateParams p;
  p.alpha = -400;
  p.k = 0.5;
  const SpectrumTable table = find_spectrum(p, 2, 2);
  TruncationSpec tr;
  tr.keys = {{1, Parity::even, 1}, {1, Parity::odd, 1}, {1, Parity::even, 2}, {1, Parity::odd, 2}, {2, Parity::even, 1}};
  tr.abs_tol = tr.rel_tol = 1e-13;
  const UnimodalEquilibrium U = build_unimodal(1, p.alpha, p);
  const CrossValidation cv = cross_validate_full(U, 0.5, 0, p, table, tr, 100);
  INFO("proj " << cv.projection_error << " disc " << cv.discrepancy);
  CHECK(cv.leakage == 0.0);
  CHECK(cv.discrepancy <= 10 * (cv.projection_error + tr.abs_tol) * (1 + std::abs(U.amplitude)));
  CHECK(cv.galerkin_limit == cv.duffing_limit);

  TruncationSpec coarse;
  coarse.keys = {{1, Parity::even, 1}};
  CHECK_THROWS_AS(cross_validate_full(U, 0.5, 0, p, table, coarse, 10, 1e-12), InvalidParameter);
}

TEST_CASE("invalid Duffing parameters") {
  DuffingParams p = dp();
  p.R2 = 0;
  CHECK_THROWS_AS(integrate_duffing(p, 0.5, 0, 10), InvalidParameter);
  CHECK_THROWS_AS(integrate_duffing(dp(), 0.5, 0, 0), InvalidParameter);
}
