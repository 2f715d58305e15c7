#include "platelab/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "platelab/errors.hpp"

namespace platelab {

using cd = std::complex<double>;

std::string to_string(QuarticClass c) {
  switch (c) {
    case QuarticClass::two_real_pair: return "two_real_pair";
    case QuarticClass::double_root: return "double_root";
    case QuarticClass::no_real: return "no_real";
    case QuarticClass::four_real: return "four_real";
  }
  return "no_real";
}

namespace {

struct Coeffs {
  double p, q, r;  // z^4 + p z^2 + q z + r
};

cd horner(const Coeffs& c, cd z) { return (((z * z) + c.p) * z + c.q) * z + c.r; }
cd dhorner(const Coeffs& c, cd z) { return (4.0 * z * z + 2.0 * c.p) * z + c.q; }

// Largest real root of y^3 + a y^2 + b y + c.
double cubic_largest_root(double a, double b, double c) {
  const double P = b - a * a / 3.0;
  const double Q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = 0.25 * Q * Q + P * P * P / 27.0;
  double x;
  if (disc > 0) {
    const double s = std::sqrt(disc);
    const double u = std::cbrt(-0.5 * Q + (Q <= 0 ? s : -s));
    x = u != 0 ? u - P / (3.0 * u) : std::cbrt(-Q);
  } else {
    const double rho = std::sqrt(-P / 3.0);
    const double arg = rho > 0 ? std::clamp(-0.5 * Q / (rho * rho * rho), -1.0, 1.0) : 0.0;
    x = 2.0 * rho * std::cos(std::acos(arg) / 3.0);
  }
  double y = x - a / 3.0;
  for (int it = 0; it < 4; ++it) {
    const double f = ((y + a) * y + b) * y + c;
    const double df = (3.0 * y + 2.0 * a) * y + b;
    if (df == 0) break;
    const double yn = y - f / df;
    if (!std::isfinite(yn)) break;
    const double fn = ((yn + a) * yn + b) * yn + c;
    if (std::abs(fn) >= std::abs(f)) break;
    y = yn;
  }
  return y;
}

// Roots of z^2 + B z + C without cancellation.
std::array<cd, 2> quadratic(cd B, cd C) {
  const cd d = std::sqrt(B * B - 4.0 * C);
  const cd s = std::real(std::conj(B) * d) >= 0 ? d : -d;
  const cd q = -0.5 * (B + s);
  if (q == 0.0) return {cd(0), cd(0)};
  return {q, C / q};
}

std::array<cd, 4> ferrari(const Coeffs& c) {
  if (c.q == 0.0) {
    const auto w = quadratic(c.p, c.r);
    const cd a = std::sqrt(w[0]), b = std::sqrt(w[1]);
    return {a, -a, b, -b};
  }
  double y = cubic_largest_root(c.p, 0.25 * c.p * c.p - c.r, -0.125 * c.q * c.q);
  if (!(y > 0)) y = std::max(y, 1e-300);
  const double s = std::sqrt(2.0 * y);
  const double base = 0.5 * c.p + y;
  const auto r1 = quadratic(-s, base + c.q / (2.0 * s));
  const auto r2 = quadratic(s, base - c.q / (2.0 * s));
  return {r1[0], r1[1], r2[0], r2[1]};
}

void polish(const Coeffs& c, std::array<cd, 4>& z) {
  for (cd& x : z) {
    for (int it = 0; it < 3; ++it) {
      const cd f = horner(c, x), df = dhorner(c, x);
      if (df == 0.0) break;
      const cd xn = x - f / df;
      if (!(std::abs(horner(c, xn)) < std::abs(f))) break;
      x = xn;
    }
  }
}

double vieta(const Coeffs& c, const std::array<cd, 4>& z) {
  // expand (x - z0)(x - z1)(x - z2)(x - z3)
  std::array<cd, 5> e{cd(1), cd(0), cd(0), cd(0), cd(0)};
  for (const cd& r : z) {
    for (int k = 4; k >= 1; --k) e[k] = e[k] - r * e[k - 1];
  }
  const std::array<double, 5> want{1.0, 0.0, c.p, c.q, c.r};
  // scale each coefficient by the size of the contributing products
  double scale_root = 1.0;
  for (const cd& r : z) scale_root = std::max(scale_root, std::abs(r));
  double worst = 0;
  for (int k = 1; k <= 4; ++k) {
    const double sc = std::max(std::abs(want[k]), std::pow(scale_root, k));
    worst = std::max(worst, std::abs(e[k] - want[k]) / sc);
  }
  return worst;
}

std::array<cd, 4> companion_roots(const Coeffs& c) {
  Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
  C(0, 3) = -c.r;
  C(1, 3) = -c.q;
  C(2, 3) = -c.p;
  C(3, 3) = 0.0;
  C(1, 0) = C(2, 1) = C(3, 2) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> es(C, false);
  std::array<cd, 4> z;
  for (int i = 0; i < 4; ++i) z[i] = es.eigenvalues()[i];
  return z;
}

}  // namespace

double QuarticRoots::vieta_residual() const {
  const double m2 = double(m) * m;
  return vieta({-2.0 * m2, -alpha, m2 * m2 + mu * m2}, z);
}

QuarticRoots quartic_roots(int m, double mu, double alpha) {
  if (m < 1) throw InvalidParameter("m", "must be >= 1");
  const double m2 = double(m) * m;
  const Coeffs c{-2.0 * m2, -alpha, m2 * m2 + mu * m2};
  QuarticRoots out;
  out.m = m;
  out.mu = mu;
  out.alpha = alpha;
  std::array<cd, 4> z = ferrari(c);
  polish(c, z);
  if (!(vieta(c, z) <= 1e-13)) {
    std::array<cd, 4> w = companion_roots(c);
    polish(c, w);
    if (vieta(c, w) < vieta(c, z)) {
      z = w;
      out.companion_refined = true;
    }
  }

  double scale = 1.0;
  for (const cd& x : z) scale = std::max(scale, std::abs(x));
  const double real_tol = 1e-10 * scale;
  const double double_tol = 1e-6 * scale;

  std::array<cd, 4> real, cplx;
  int nr = 0, nc = 0;
  for (const cd& x : z) {
    if (std::abs(x.imag()) <= real_tol)
      real[nr++] = cd(x.real(), 0.0);
    else
      cplx[nc++] = x;
  }
  std::sort(real.begin(), real.begin() + nr, [](cd a, cd b) { return a.real() < b.real(); });
  // pair conjugates: upper half-plane member first
  std::sort(cplx.begin(), cplx.begin() + nc, [](cd a, cd b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() > b.imag();
  });
  for (int i = 0; i + 1 < nc; i += 2) {
    if (cplx[i].imag() < 0) std::swap(cplx[i], cplx[i + 1]);
    cplx[i + 1] = std::conj(cplx[i]);
  }
  int k = 0;
  for (int i = 0; i < nr; ++i) out.z[k++] = real[i];
  for (int i = 0; i < nc; ++i) out.z[k++] = cplx[i];

  auto close = [&](cd a, cd b) { return std::abs(a - b) <= double_tol; };
  if (nr == 4) {
    out.cls = (close(out.z[0], out.z[1]) || close(out.z[1], out.z[2]) || close(out.z[2], out.z[3]))
                  ? QuarticClass::double_root
                  : QuarticClass::four_real;
  } else if (nr == 2) {
    out.cls = close(out.z[0], out.z[1]) ? QuarticClass::double_root : QuarticClass::two_real_pair;
  } else {
    bool near_real = false;
    for (int i = 0; i < nc; ++i) near_real = near_real || std::abs(cplx[i].imag()) <= double_tol;
    out.cls = near_real ? QuarticClass::double_root : QuarticClass::no_real;
  }
  return out;
}

double alpha_crit(int m, double mu) {
  if (m < 1) throw InvalidParameter("m", "must be >= 1");
  if (!(mu >= 0)) throw InvalidParameter("mu", "must be >= 0");
  const double mm = m;
  const double r = std::sqrt(4.0 * mm * mm + 3.0 * mu);
  return -(4.0 * mm / (3.0 * std::sqrt(3.0))) * (r - 2.0 * mm) * std::sqrt(mm * mm + mm * r);
}

}  // namespace platelab
