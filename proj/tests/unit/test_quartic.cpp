#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "catch_amalgamated.hpp"

#include "platelab/errors.hpp"
#include "platelab/quartic.hpp"

using namespace platelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// companion-matrix roots of z^4 - 2m^2 z^2 - alpha z + m^4 + mu m^2, sorted by (Re, Im)
std::vector<std::complex<double>> companion(int m, double mu, double alpha) {
  const double m2 = double(m) * m;
  Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
  C(1, 0) = C(2, 1) = C(3, 2) = 1;
  C(0, 3) = -(m2 * m2 + mu * m2);
  C(1, 3) = alpha;
  C(2, 3) = 2 * m2;
  Eigen::EigenSolver<Eigen::Matrix4d> es(C);
  std::vector<std::complex<double>> z(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  std::sort(z.begin(), z.end(), [](auto a, auto b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  return z;
}

// tangency oracle: h(z) = h'(z) = 0 eliminates alpha = 4z^3 - 4m^2 z, leaving -3z^4 + 2m^2 z^2 + m^4 + mu m^2 = 0
double tangency_alpha(int m, double mu) {
  const double m2 = double(m) * m;
  const double z2 = (m2 + std::sqrt(4 * m2 * m2 + 3 * mu * m2)) / 3;
  const double z = -std::sqrt(z2);
  return 4 * z * (z2 - m2);
}

}  // namespace

TEST_CASE("mu = alpha = 0 gives double roots at +-m") {
  for (int m = 1; m <= 5; ++m) {
    const QuarticRoots q = quartic_roots(m, 0, 0);
    CHECK(q.cls == QuarticClass::double_root);
    std::vector<double> re;
    for (auto z : q.z) {
      CHECK(std::abs(z.imag()) <= 1e-12);
      re.push_back(z.real());
    }
    std::sort(re.begin(), re.end());
    CHECK_THAT(re[0], WithinAbs(-m, 1e-12));
    CHECK_THAT(re[1], WithinAbs(-m, 1e-12));
    CHECK_THAT(re[2], WithinAbs(m, 1e-12));
    CHECK_THAT(re[3], WithinAbs(m, 1e-12));
  }
}

TEST_CASE("alpha_crit closed form and special values") {
  for (int m = 1; m <= 5; ++m) CHECK(alpha_crit(m, 0) == 0.0);
  CHECK_THAT(alpha_crit(1, 4), WithinAbs(-8 * std::sqrt(15.0) / 9, 1e-12));
  for (int m = 1; m <= 5; ++m)
    for (double mu : {0.1, 1.0, 7.5, 42.0, 100.0}) CHECK_THAT(alpha_crit(m, mu), WithinRel(tangency_alpha(m, mu), 1e-12));
  CHECK_THROWS_AS(alpha_crit(1, -1), InvalidParameter);
}

TEST_CASE("alpha_crit decreases in mu") {
  for (int m = 1; m <= 5; ++m) {
    double prev = alpha_crit(m, 0);
    for (int i = 1; i <= 200; ++i) {
      const double a = alpha_crit(m, 0.5 * i);
      CHECK(a < prev);
      prev = a;
    }
  }
}

TEST_CASE("tangency at the critical value") {
  const QuarticRoots q = quartic_roots(1, 4, alpha_crit(1, 4));
  CHECK(q.cls == QuarticClass::double_root);
  CHECK(q.z[0].real() < 0);
  CHECK_THAT(q.z[0].real(), WithinAbs(q.z[1].real(), 1e-6));
}

TEST_CASE("two negative real roots and a conjugate pair below the critical value") {
  const QuarticRoots q = quartic_roots(1, 1, -10);
  REQUIRE(q.cls == QuarticClass::two_real_pair);
  CHECK(q.z[0].real() < q.z[1].real());
  CHECK(q.z[1].real() < 0);
  CHECK(q.z[2].imag() > 0);
  CHECK(q.z[2] == std::conj(q.z[3]));
  CHECK(q.z[2].real() > 0);
  const auto c = companion(1, 1, -10);
  CHECK_THAT(q.z[0].real(), WithinAbs(c[0].real(), 1e-10));
  CHECK_THAT(q.z[1].real(), WithinAbs(c[1].real(), 1e-10));
  CHECK_THAT(q.z[2].real(), WithinAbs(c[3].real(), 1e-10));
  CHECK_THAT(q.z[2].imag(), WithinAbs(c[3].imag(), 1e-10));
  // frozen after companion agreement
  CHECK_THAT(q.z[0].real(), WithinAbs(-2.409509395486, 1e-10));
  CHECK_THAT(q.z[1].real(), WithinAbs(-0.192710454215, 1e-10));
}

TEST_CASE("classification holds on a grid below the critical curve") {
  int checked = 0;
  for (int m = 1; m <= 5; ++m)
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double mu = 10.0 * i * m;
        const double ac = alpha_crit(m, mu);
        const double alpha = std::min(ac, -1e-3) * (1.001 + 0.5 * j) - 0.01 * j;
        const QuarticRoots q = quartic_roots(m, mu, alpha);
        INFO("m=" << m << " mu=" << mu << " alpha=" << alpha);
        CHECK(q.cls == QuarticClass::two_real_pair);
        CHECK(q.z[1].real() < 0);
        CHECK(q.vieta_residual() < 1e-10);
        ++checked;
      }
  CHECK(checked == 500);
}

TEST_CASE("Vieta identities over mixed classes") {
  for (int m = 1; m <= 4; ++m)
    for (double mu : {0.0, 0.3, 5.0, 80.0})
      for (double alpha : {-1e4, -300.0, -3.0, -0.1, 0.0, 0.5, 40.0}) {
        const QuarticRoots q = quartic_roots(m, mu, alpha);
        INFO("m=" << m << " mu=" << mu << " alpha=" << alpha << " " << to_string(q.cls));
        CHECK(q.vieta_residual() < 1e-10);
      }
}

TEST_CASE("reflection alpha -> -alpha maps z -> -z") {
  const QuarticRoots a = quartic_roots(2, 3, -50), b = quartic_roots(2, 3, 50);
  std::vector<double> ra, rb;
  for (int i = 0; i < 4; ++i) {
    ra.push_back(a.z[std::size_t(i)].real());
    rb.push_back(-b.z[std::size_t(i)].real());
  }
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  for (int i = 0; i < 4; ++i) CHECK_THAT(ra[std::size_t(i)], WithinAbs(rb[std::size_t(i)], 1e-10));
}
