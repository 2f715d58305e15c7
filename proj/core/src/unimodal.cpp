#include "platelab/unimodal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "platelab/errors.hpp"

namespace platelab {

using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double polish_root(F f, double a, double b, double fa, double fb) {
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(48),
                                             iters);
  return 0.5 * (r.first + r.second);
}

struct ScaledD {
  Eigen::Matrix4d M;
  Eigen::Vector4d col_scale;  // A = col_scale .* x for a null vector x of M
};

PsiSolution make_basis(int m, double mu, double alpha, const PlateParams& p) {
  PsiSolution s;
  s.m = m;
  s.mu = mu;
  s.alpha = alpha;
  s.ell = p.ell;
  s.sigma = p.sigma;
  s.roots = quartic_roots(m, mu, alpha);
  if (s.roots.cls != QuarticClass::two_real_pair)
    throw InvalidParameter("alpha", fmt::format("alpha={} must satisfy |alpha| > |alpha_crit({}, {})|={} "
                                                "(root class is {})",
                                                alpha, m, mu, std::abs(alpha_crit(m, std::max(mu, 0.0))),
                                                to_string(s.roots.cls)));
  return s;
}

ScaledD scaled_matrix(const PsiSolution& s) {
  const double m2 = double(s.m) * s.m;
  ScaledD out;
  const double ys[2] = {-s.ell, s.ell};
  for (int e = 0; e < 2; ++e) {
    for (int k = 0; k < 4; ++k) {
      const double f0 = s.basis(k, ys[e], 0), f1 = s.basis(k, ys[e], 1);
      const double f2 = s.basis(k, ys[e], 2), f3 = s.basis(k, ys[e], 3);
      out.M(2 * e, k) = f2 - s.sigma * m2 * f0;
      out.M(2 * e + 1, k) = f3 - (2.0 - s.sigma) * m2 * f1;
    }
  }
  for (int k = 0; k < 4; ++k) {
    const double c = out.M.col(k).cwiseAbs().maxCoeff();
    out.col_scale(k) = c > 0 ? 1.0 / c : 1.0;
    out.M.col(k) *= out.col_scale(k);
  }
  for (int r = 0; r < 4; ++r) {
    const double c = out.M.row(r).cwiseAbs().maxCoeff();
    if (c > 0) out.M.row(r) /= c;
  }
  return out;
}

int nodes_for(const PsiSolution& s) {
  return 64 * int(std::max(1.0, std::ceil(s.stiffness() / 16.0)));
}

double safe_D(int m, double mu, double alpha, const PlateParams& p) {
  try {
    return boundary_determinant_D(m, mu, alpha, p);
  } catch (const InvalidParameter&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// true if D(m, mu, .) changes sign strictly between alpha_crit(m, mu) and phi
bool has_root_above(int m, double mu, double phi, const PlateParams& p) {
  const double ac = alpha_crit(m, mu);
  const double top = ac - 1e-7 * std::max(1.0, std::abs(ac));
  const double bottom = phi + 1e-6 * std::abs(phi);
  if (!(bottom < top)) return false;
  const int n = 40;
  double prev = safe_D(m, mu, top, p);
  for (int i = 1; i <= n; ++i) {
    const double a = top - (top - bottom) * std::pow(double(i) / n, 3.0);
    const double d = safe_D(m, mu, a, p);
    if (std::isfinite(prev) && std::isfinite(d) && sgn(prev) * sgn(d) < 0) return true;
    prev = d;
  }
  return false;
}

}  // namespace

double PsiSolution::basis(int k, double y, int d) const {
  if (k < 2) {
    const double z = roots.z[k].real();
    return std::pow(z, d) * std::exp(z * y - std::abs(z) * ell);
  }
  const cd w = roots.z[2];
  const cd v = std::pow(w, d) * std::exp(w * y - std::abs(w.real()) * ell);
  return k == 2 ? v.real() : v.imag();
}

double PsiSolution::eval(double y, int d) const {
  double s = 0;
  for (int k = 0; k < 4; ++k) s += A[k] * basis(k, y, d);
  return s;
}

double PsiSolution::stiffness() const {
  double s = 0;
  for (const cd& z : roots.z) s = std::max(s, std::abs(z) * ell);
  return s;
}

Eigen::Matrix4d boundary_matrix_D(int m, double mu, double alpha, const PlateParams& params) {
  return scaled_matrix(make_basis(m, mu, alpha, params)).M;
}

double boundary_determinant_D(int m, double mu, double alpha, const PlateParams& params) {
  return boundary_matrix_D(m, mu, alpha, params).fullPivLu().determinant();
}

double mu_crit(int m, double alpha) {
  const double target = -std::abs(alpha);
  if (target == 0) return 0;
  double hi = 1.0;
  while (alpha_crit(m, hi) > target) {
    hi *= 2.0;
    if (hi > 1e300) throw RootSearchError("mu_crit: no bracket", 0, hi);
  }
  auto f = [&](double mu) { return alpha_crit(m, mu) - target; };
  return polish_root(f, 0.0, hi, f(0.0), f(hi));
}

std::vector<double> solve_mu(int m, double alpha, const PlateParams& params, const MuWindow& w) {
  if (m < 1) throw InvalidParameter("m", "must be >= 1");
  if (w.samples < 2) throw InvalidParameter("window.samples", "must be >= 2");
  const double lo = std::max({w.lo, 0.0, -params.P});
  const double mc = mu_crit(m, alpha);
  const double hi = std::min(w.hi, mc * (1.0 - 1e-9));
  std::vector<double> roots;
  if (!(hi > lo)) return roots;

  std::vector<double> grid;
  for (int i = 0; i <= w.samples; ++i) grid.push_back(lo + (hi - lo) * double(i) / w.samples);
  for (int j = 1; j <= 12; ++j) grid.push_back(lo + (hi - lo) * std::pow(10.0, -j) / w.samples);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto D = [&](double mu) { return safe_D(m, mu, alpha, params); };
  double prev = D(grid[0]);
  if (prev == 0) roots.push_back(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = D(grid[i]);
    if (cur == 0) {
      roots.push_back(grid[i]);
    } else if (std::isfinite(prev) && std::isfinite(cur) && sgn(prev) * sgn(cur) < 0) {
      roots.push_back(polish_root(D, grid[i - 1], grid[i], prev, cur));
    }
    prev = cur;
  }
  return roots;
}

double first_alpha_root(int m, double mu, const PlateParams& params, double max_abs_alpha) {
  const double ac = alpha_crit(m, mu);
  auto D = [&](double a) { return safe_D(m, mu, a, params); };
  double s = 1e-7 * std::max(1.0, std::abs(ac));
  double a_prev = ac - s;
  double d_prev = D(a_prev);
  while (-(ac - s) < max_abs_alpha) {
    s *= 1.03;
    const double a = ac - s;
    const double d = D(a);
    if (d == 0) return a;
    if (std::isfinite(d_prev) && std::isfinite(d) && sgn(d_prev) * sgn(d) < 0)
      return polish_root(D, a, a_prev, d, d_prev);
    a_prev = a;
    d_prev = d;
  }
  throw RootSearchError(fmt::format("no zero of D({}, {}, alpha) below alpha_crit", m, mu), -max_abs_alpha, ac);
}

double BranchCurve::monotonicity_violation() const {
  double worst = 0;
  for (std::size_t i = 1; i < phi.size(); ++i)
    worst = std::max(worst, (phi[i] - phi[i - 1]) / std::max(std::abs(phi[i - 1]), 1e-300));
  return worst;
}

BranchCurve trace_branch(int m, double mu_lo, double mu_hi, const PlateParams& params, int n_out) {
  if (!(mu_lo >= 0) || !(mu_hi > mu_lo)) throw InvalidParameter("mu_range", "need 0 <= mu_lo < mu_hi");
  if (n_out < 2) throw InvalidParameter("n_out", "must be >= 2");
  BranchCurve c;
  c.m = m;
  auto D = [&](double mu, double a) { return safe_D(m, mu, a, params); };

  double mu_c = mu_lo;
  double phi_c = first_alpha_root(m, mu_c, params);
  double slope = 0;
  c.mu.push_back(mu_c);
  c.phi.push_back(phi_c);
  const double h_min = 1e-7 * (mu_hi - mu_lo);

  for (int i = 1; i < n_out; ++i) {
    const double target = mu_lo + (mu_hi - mu_lo) * double(i) / (n_out - 1);
    double h = target - mu_c;
    while (mu_c < target) {
      h = std::min(h, target - mu_c);
      const double mu_n = (target - mu_c - h < 1e-12 * target) ? target : mu_c + h;
      const double pred = phi_c + slope * (mu_n - mu_c);
      const double width = std::max(1e-3 * std::abs(pred), std::abs(slope * (mu_n - mu_c)));
      const double top = alpha_crit(m, mu_n) - 1e-9 * std::max(1.0, std::abs(pred));
      const double a = pred - width, b = std::min(pred + width, top);
      const double da = D(mu_n, a), db = D(mu_n, b);
      double phi_n;
      if (a < b && std::isfinite(da) && std::isfinite(db) && sgn(da) * sgn(db) < 0) {
        phi_n = polish_root([&](double x) { return D(mu_n, x); }, a, b, da, db);
      } else if (h > h_min) {
        h *= 0.5;
        continue;
      } else {
        c.diagnostics.push_back(fmt::format("lost bracket at mu={}; restarted by sweep", mu_n));
        try {
          phi_n = first_alpha_root(m, mu_n, params);
        } catch (const RootSearchError& e) {
          c.complete = false;
          c.diagnostics.push_back(e.what());
          return c;
        }
      }
      slope = (phi_n - phi_c) / (mu_n - mu_c);
      mu_c = mu_n;
      phi_c = phi_n;
      h *= 2.0;
    }
    if (has_root_above(m, mu_c, phi_c, params)) {
      c.diagnostics.push_back(fmt::format("continuation jumped branch at mu={}; reset to first root", mu_c));
      phi_c = first_alpha_root(m, mu_c, params);
    }
    c.mu.push_back(mu_c);
    c.phi.push_back(phi_c);
  }
  return c;
}

std::string branch_csv(const std::vector<BranchCurve>& curves) {
  std::string out = "m,mu,phi\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.mu.size(); ++i) out += fmt::format("{},{:.17g},{:.17g}\n", c.m, c.mu[i], c.phi[i]);
  return out;
}

double UnimodalEquilibrium::value(double x, double y) const { return profile(y) * std::sin(m * x); }

UnimodalEquilibrium build_unimodal(int m, double alpha, const PlateParams& params, const MuWindow& window) {
  params.validate_stretching();
  auto mus = solve_mu(m, alpha, params, window);
  if (mus.empty())
    throw InvalidParameter("alpha", fmt::format("no unimodal solution for m={} at alpha={} (alpha above threshold)",
                                                m, alpha));
  UnimodalEquilibrium U;
  U.m = m;
  U.alpha = alpha;
  U.mu = mus.back();
  for (auto it = mus.rbegin(); it != mus.rend(); ++it) {
    try {
      const double phi = first_alpha_root(m, *it, params);
      if (std::abs(phi + std::abs(alpha)) <= 1e-6 * std::abs(alpha)) {
        U.mu = *it;
        U.principal = true;
        break;
      }
    } catch (const RootSearchError&) {
    }
  }
  if (!(U.mu > -params.P)) throw InvalidParameter("mu", "mu <= -P: rescaling undefined");

  PsiSolution s = make_basis(m, U.mu, alpha, params);
  const ScaledD sd = scaled_matrix(s);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(sd.M, Eigen::ComputeFullV);
  for (int k = 0; k < 4; ++k) U.singular_values[k] = svd.singularValues()(k);
  const Eigen::Vector4d x = svd.matrixV().col(3);
  for (int k = 0; k < 4; ++k) s.A[k] = sd.col_scale(k) * x(k);

  const int nodes = nodes_for(s);
  const double l2 = (kPi / 2.0) * y_integral([&](double y) { const double v = s.eval(y); return v * v; },
                                             s.ell, nodes);
  double sign = sgn(y_integral([&](double y) { return s.eval(y); }, s.ell, nodes));
  const double mass = y_integral([&](double y) { return std::abs(s.eval(y)); }, s.ell, nodes);
  if (std::abs(y_integral([&](double y) { return s.eval(y); }, s.ell, nodes)) < 1e-8 * mass) {
    double best = 0;
    for (int i = 0; i <= 400; ++i) {
      const double v = s.eval(-s.ell + 2.0 * s.ell * i / 400);
      if (std::abs(v) > std::abs(best)) best = v;
    }
    sign = sgn(best);
  }
  const double scale = sign / std::sqrt(l2);
  for (double& a : s.A) a *= scale;
  U.psi = s;
  U.amplitude = std::sqrt((U.mu + params.P) / params.S) / m;
  U.residual = stationary_residual(U, params);
  U.zero_count = count_x_zeros(U);
  return U;
}

namespace {

ProfileResidual residual_impl(const PsiSolution& s, double amp, double coef, int grid) {
  const double m2 = double(s.m) * s.m;
  ProfileResidual r;
  double num = 0, den = 0, b1 = 0, b2 = 0;
  for (int i = 0; i < grid; ++i) {
    const double y = -s.ell + 2.0 * s.ell * i / (grid - 1);
    double d[5];
    for (int k = 0; k < 5; ++k) d[k] = amp * s.eval(y, k);
    const double t1 = d[4], t2 = -2.0 * m2 * d[2], t3 = m2 * m2 * d[0] + coef * d[0], t4 = -s.alpha * d[1];
    num = std::max(num, std::abs(t1 + t2 + t3 + t4));
    den = std::max(den, std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4));
    b1 = std::max(b1, std::abs(d[2]) + s.sigma * m2 * std::abs(d[0]));
    b2 = std::max(b2, std::abs(d[3]) + (2.0 - s.sigma) * m2 * std::abs(d[1]));
  }
  r.ode = den > 0 ? num / den : 0;
  for (double y : {-s.ell, s.ell}) {
    const double c1 = amp * (s.eval(y, 2) - s.sigma * m2 * s.eval(y, 0));
    const double c2 = amp * (s.eval(y, 3) - (2.0 - s.sigma) * m2 * s.eval(y, 1));
    if (b1 > 0) r.boundary = std::max(r.boundary, std::abs(c1) / b1);
    if (b2 > 0) r.boundary = std::max(r.boundary, std::abs(c2) / b2);
  }
  return r;
}

}  // namespace

ProfileResidual psi_residual(const PsiSolution& psi, int grid) {
  return residual_impl(psi, 1.0, psi.mu * double(psi.m) * psi.m, grid);
}

ProfileResidual stationary_residual(const UnimodalEquilibrium& U, const PlateParams& params, int grid) {
  const PsiSolution& s = U.psi;
  const double m2 = double(U.m) * U.m;
  const double ux2 = m2 * U.amplitude * U.amplitude * (kPi / 2.0) *
                     y_integral([&](double y) { const double v = s.eval(y); return v * v; }, s.ell, nodes_for(s));
  return residual_impl(s, U.amplitude, m2 * (params.S * ux2 - params.P), grid);
}

int count_x_zeros(const UnimodalEquilibrium& U, int nx) {
  double ystar = 0, best = 0;
  for (int i = 0; i <= 400; ++i) {
    const double y = -U.psi.ell + 2.0 * U.psi.ell * i / 400;
    if (std::abs(U.psi.eval(y)) > best) {
      best = std::abs(U.psi.eval(y));
      ystar = y;
    }
  }
  int zeros = 0;
  double prev = U.value(kPi * 0.5 / nx, ystar);
  for (int i = 1; i < nx; ++i) {
    const double v = U.value(kPi * (i + 0.5) / nx, ystar);
    if (sgn(v) * sgn(prev) < 0) ++zeros;
    prev = v;
  }
  return zeros;
}

double alpha_bar(int m, const PlateParams& params, const MuWindow& window, double rel_tol) {
  const double lo_mu = std::max({window.lo, 0.0, -params.P});
  double hi = std::min(alpha_crit(m, lo_mu), 0.0) - 1e-9;
  if (!solve_mu(m, hi, params, window).empty())
    throw RootSearchError("alpha_bar: solutions already present just below alpha_crit", hi, hi);
  double step = 1.0, lo = hi - step;
  while (solve_mu(m, lo, params, window).empty()) {
    hi = lo;
    step *= 2.0;
    lo = hi - step;
    if (step > 1e9) throw RootSearchError("alpha_bar: no unimodal solution found", lo, hi);
  }
  while (hi - lo > rel_tol * std::abs(lo)) {
    const double mid = 0.5 * (lo + hi);
    (solve_mu(m, mid, params, window).empty() ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd unimodal_coefficients(const UnimodalEquilibrium& U, const SpectrumTable& table,
                                      const std::vector<ModeKey>& keys) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(Eigen::Index(keys.size()));
  const int nodes = std::max(96, nodes_for(U.psi));
  for (std::size_t j = 0; j < keys.size(); ++j) {
    if (keys[j].m != U.m) continue;
    const PsiProfile& pj = table.modes[table.index_of(keys[j])].psi;
    c(Eigen::Index(j)) = U.amplitude * (kPi / 2.0) *
                         y_integral([&](double y) { return U.psi.eval(y) * pj.eval(y); }, U.psi.ell, nodes);
  }
  return c;
}

double unimodal_projection_error(const UnimodalEquilibrium& U, const SpectrumTable& table,
                                 const std::vector<ModeKey>& keys) {
  const Eigen::VectorXd c = unimodal_coefficients(U, table, keys);
  std::vector<const PsiProfile*> prof;
  std::vector<double> coef;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    if (keys[j].m != U.m) continue;
    prof.push_back(&table.modes[table.index_of(keys[j])].psi);
    coef.push_back(c(Eigen::Index(j)));
  }
  const double m2 = double(U.m) * U.m, sig = U.psi.sigma;
  auto v = [&](double y, int d) {
    double s = U.amplitude * U.psi.eval(y, d);
    for (std::size_t j = 0; j < prof.size(); ++j) s -= coef[j] * prof[j]->eval(y, d);
    return s;
  };
  const double a = (kPi / 2.0) * y_integral(
                                     [&](double y) {
                                       const double v0 = v(y, 0), v1 = v(y, 1), v2 = v(y, 2);
                                       return v2 * v2 + m2 * m2 * v0 * v0 - 2.0 * sig * m2 * v0 * v2 +
                                              2.0 * (1.0 - sig) * m2 * v1 * v1;
                                     },
                                     U.psi.ell, std::max(128, nodes_for(U.psi)));
  return std::sqrt(std::max(a, 0.0));
}

}  // namespace platelab
