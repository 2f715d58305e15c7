#include "platelab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "platelab/errors.hpp"
#include "platelab/quadrature.hpp"

namespace platelab {

using std::numbers::pi;

std::string to_string(RootBranch b) {
  switch (b) {
    case RootBranch::below: return "below";
    case RootBranch::degenerate: return "degenerate";
    case RootBranch::above: return "above";
  }
  return "below";
}

double CharacteristicRoots::big() const { return std::sqrt(r2_plus); }

double CharacteristicRoots::small() const {
  return branch == RootBranch::degenerate ? 0.0 : std::sqrt(std::abs(r2_minus));
}

CharacteristicRoots characteristic_roots(int m, double lambda) {
  if (m < 1) throw InvalidParameter("m", "must be >= 1");
  if (!(lambda > 0)) throw InvalidParameter("lambda", "must be > 0");
  const double m2 = double(m) * m;
  const double s = std::sqrt(lambda);
  CharacteristicRoots r;
  r.r2_plus = m2 + s;
  r.r2_minus = m2 - s;
  const double m4 = m2 * m2;
  r.branch = lambda < m4 ? RootBranch::below : (lambda == m4 ? RootBranch::degenerate : RootBranch::above);
  if (r.branch == RootBranch::degenerate) r.r2_minus = 0.0;
  return r;
}

namespace {

// cosh(z)/cosh(Z) and sinh(z)/cosh(Z) for |z| <= Z without overflow.
double cosh_ratio(double z, double Z) {
  const double az = std::abs(z);
  return std::exp(az - Z) * (1.0 + std::exp(-2.0 * az)) / (1.0 + std::exp(-2.0 * Z));
}

double sinh_ratio(double z, double Z) {
  const double az = std::abs(z);
  const double v = std::exp(az - Z) * (-std::expm1(-2.0 * az)) / (1.0 + std::exp(-2.0 * Z));
  return z < 0 ? -v : v;
}

// Basis derivatives without the profile object (used by the determinant).
double big_fn(double a, double ell, Parity par, double y, int d) {
  const double ad = std::pow(a, d);
  const bool cosh_like = (par == Parity::even) == (d % 2 == 0);
  return ad * (cosh_like ? cosh_ratio(a * y, a * ell) : sinh_ratio(a * y, a * ell));
}

double small_fn(const CharacteristicRoots& r, double ell, Parity par, double y, int d) {
  switch (r.branch) {
    case RootBranch::degenerate:
      if (par == Parity::even) return d == 0 ? 1.0 : 0.0;
      return d == 0 ? y : (d == 1 ? 1.0 : 0.0);
    case RootBranch::below: {
      const double b = r.small();
      if (par == Parity::even) {
        const double bd = std::pow(b, d);
        return bd * (d % 2 == 0 ? cosh_ratio(b * y, b * ell) : sinh_ratio(b * y, b * ell));
      }
      if (d == 0) return b > 0 ? sinh_ratio(b * y, b * ell) / b : y;
      const double bd = std::pow(b, d - 1);
      return bd * (d % 2 == 1 ? cosh_ratio(b * y, b * ell) : sinh_ratio(b * y, b * ell));
    }
    case RootBranch::above: {
      const double c = r.small();
      const double cy = c * y;
      // derivatives of cos: cos, -sin, -cos, sin
      auto dcos = [&](int k) {
        switch (k % 4) {
          case 0: return std::cos(cy);
          case 1: return -std::sin(cy);
          case 2: return -std::cos(cy);
          default: return std::sin(cy);
        }
      };
      if (par == Parity::even) return std::pow(c, d) * dcos(d);
      if (d == 0) return std::sin(cy) / c;
      // d/dy^d sin(cy)/c = c^(d-1) * sin^(d)-pattern = c^(d-1) * dcos(d-1)
      return std::pow(c, d - 1) * dcos(d - 1);
    }
  }
  return 0.0;
}

std::array<double, 2> boundary_rows(int m, double sigma, double f0, double f1, double f2, double f3) {
  const double m2 = double(m) * m;
  return {f2 - sigma * m2 * f0, f3 - (2.0 - sigma) * m2 * f1};
}

// Boundary matrix at y = ell, columns [big, small], rows scaled to unit max-norm.
Eigen::Matrix2d boundary_matrix(int m, double lambda, Parity par, double ell, double sigma) {
  const CharacteristicRoots r = characteristic_roots(m, lambda);
  const double a = r.big();
  Eigen::Matrix2d M;
  const auto cb = boundary_rows(m, sigma, big_fn(a, ell, par, ell, 0), big_fn(a, ell, par, ell, 1),
                                big_fn(a, ell, par, ell, 2), big_fn(a, ell, par, ell, 3));
  const auto cs =
      boundary_rows(m, sigma, small_fn(r, ell, par, ell, 0), small_fn(r, ell, par, ell, 1),
                    small_fn(r, ell, par, ell, 2), small_fn(r, ell, par, ell, 3));
  M << cb[0], cs[0], cb[1], cs[1];
  for (int i = 0; i < 2; ++i) {
    const double s = M.row(i).cwiseAbs().maxCoeff();
    if (s > 0) M.row(i) /= s;
  }
  return M;
}

// Gauss nodes large enough for the oscillation/growth content of a profile.
int nodes_for(const PsiProfile& p, int base) {
  const double content = (p.roots.big() + p.roots.small()) * p.ell;
  const int factor = std::max(1, static_cast<int>(std::ceil(content / 16.0)));
  return base * factor;
}

}  // namespace

double PsiProfile::big_basis(double y, int d) const { return big_fn(roots.big(), ell, parity, y, d); }

double PsiProfile::small_basis(double y, int d) const { return small_fn(roots, ell, parity, y, d); }

double PsiProfile::eval(double y, int d) const {
  return coef_big * big_basis(y, d) + coef_small * small_basis(y, d);
}

std::array<double, 5> PsiProfile::derivatives(double y) const {
  std::array<double, 5> out{};
  for (int d = 0; d < 5; ++d) out[d] = eval(y, d);
  return out;
}

double EigenMode::value(double x, double y) const { return psi.eval(y) * std::sin(key.m * x); }

double free_edge_determinant(int m, double lambda, Parity parity, double ell, double sigma) {
  return boundary_matrix(m, lambda, parity, ell, sigma).determinant();
}

double free_edge_determinant(int m, double lambda, Parity parity, const PlateParams& params) {
  return free_edge_determinant(m, lambda, parity, params.ell, params.sigma);
}

double y_integral(const std::function<double(double)>& f, double ell, int nodes) {
  const GaussRule& g = gauss_legendre(nodes);
  double s = 0;
  for (int i = 0; i < nodes; ++i) s += g.w[i] * f(ell * g.x[i]);
  return s * ell;
}

double y_inner(const PsiProfile& a, int da, const PsiProfile& b, int db, int nodes) {
  const int n = std::max(nodes_for(a, nodes), nodes_for(b, nodes));
  return 0.5 * pi * y_integral([&](double y) { return a.eval(y, da) * b.eval(y, db); }, a.ell, n);
}

double a_form(const EigenMode& wi, const EigenMode& wj, double sigma, int nodes) {
  if (wi.key.m != wj.key.m) return 0.0;
  const double m2 = double(wi.key.m) * wi.key.m;
  const PsiProfile &p = wi.psi, &q = wj.psi;
  const int n = std::max(nodes_for(p, nodes), nodes_for(q, nodes));
  auto integrand = [&](double y) {
    const auto dp = p.derivatives(y);
    const auto dq = q.derivatives(y);
    return dp[2] * dq[2] + m2 * m2 * dp[0] * dq[0] - sigma * m2 * (dp[0] * dq[2] + dp[2] * dq[0]) +
           2.0 * (1.0 - sigma) * m2 * dp[1] * dq[1];
  };
  return 0.5 * pi * y_integral(integrand, p.ell, n);
}

namespace {

struct FamilyRoots {
  std::vector<double> lambdas;
};

FamilyRoots family_roots(int m, Parity par, double ell, double sigma, int per_m, int refinement) {
  namespace bt = boost::math::tools;
  const double m2 = double(m) * m, m4 = m2 * m2;
  FamilyRoots out;

  auto det_t = [&](double t) { return free_edge_determinant(m, t * m4, par, ell, sigma); };
  auto det_c = [&](double c) {
    const double s = m2 + c * c;
    return free_edge_determinant(m, s * s, par, ell, sigma);
  };
  auto add_root = [&](double lam) {
    for (double x : out.lambdas)
      if (std::abs(x - lam) <= 1e-12 * lam) return;
    out.lambdas.push_back(lam);
  };
  auto polish = [&](auto& f, double lo, double hi, double flo, double fhi) {
    std::uintmax_t iters = 200;
    auto [a, b] = bt::toms748_solve(f, lo, hi, flo, fhi, bt::eps_tolerance<double>(50), iters);
    if (iters >= 200) throw RootSearchError("free-edge determinant polish did not converge", lo, hi);
    const double fa = f(a), fb = f(b);
    return std::abs(fa) <= std::abs(fb) ? a : b;
  };

  // Below m^4 every eigenvalue exceeds (1 - sigma^2) m^4, from a(v,v) >= (1-sigma^2)||v_xx||^2.
  const double t_lo = (1.0 - sigma * sigma) * (1.0 - 1e-9);
  std::vector<double> tgrid;
  const int nA = 64 * refinement;
  for (int i = 0; i < nA; ++i) tgrid.push_back(t_lo + (1.0 - t_lo) * i / nA);
  for (int j = 7; j <= 45; ++j) tgrid.push_back(t_lo + (1.0 - t_lo) * std::ldexp(1.0, -j));
  std::sort(tgrid.begin(), tgrid.end());
  tgrid.erase(std::unique(tgrid.begin(), tgrid.end()), tgrid.end());
  tgrid.push_back(1.0);  // lambda = m^4 exactly, shared with c = 0

  std::vector<double> fA(tgrid.size());
  for (std::size_t i = 0; i < tgrid.size(); ++i) fA[i] = det_t(tgrid[i]);
  for (std::size_t i = 0; i + 1 < tgrid.size(); ++i) {
    if (fA[i] == 0.0) {
      add_root(tgrid[i] * m4);
    } else if (fA[i] * fA[i + 1] < 0) {
      add_root(polish(det_t, tgrid[i], tgrid[i + 1], fA[i], fA[i + 1]) * m4);
    }
  }
  if (fA.back() == 0.0) add_root(m4);

  // Above m^4, sweep c with lambda = (m^2 + c^2)^2.
  const double dc = pi / (16.0 * ell * refinement);
  const double c_cap = (2.0 * per_m + 4.0) * pi / ell + 2.0 * m;
  std::vector<double> cgrid;
  for (int j = 40; j >= 1; --j) cgrid.push_back(dc * std::ldexp(1.0, -j));
  double c_prev = 0.0, f_prev = fA.back();
  auto count = [&]() { return static_cast<int>(out.lambdas.size()); };
  for (std::size_t i = 0; count() < per_m; ++i) {
    const double c = i < cgrid.size() ? cgrid[i] : double(i - cgrid.size() + 1) * dc;
    if (c > c_cap) {
      std::ostringstream os;
      os << "found only " << count() << " of " << per_m << " roots for m=" << m << " "
         << to_string(par) << " in lambda in [" << t_lo * m4 << ", "
         << std::pow(m2 + c_cap * c_cap, 2) << "]";
      throw RootSearchError(os.str(), t_lo * m4, std::pow(m2 + c_cap * c_cap, 2));
    }
    const double f = det_c(c);
    if (f == 0.0) {
      const double s = m2 + c * c;
      add_root(s * s);
    } else if (f_prev * f < 0) {
      const double cr = polish(det_c, c_prev, c, f_prev, f);
      const double s = m2 + cr * cr;
      add_root(s * s);
    }
    c_prev = c;
    f_prev = f;
  }
  std::sort(out.lambdas.begin(), out.lambdas.end());
  out.lambdas.resize(std::min<std::size_t>(out.lambdas.size(), per_m));
  return out;
}

PsiProfile build_profile(int m, Parity par, double lambda, double ell, double sigma) {
  PsiProfile p;
  p.m = m;
  p.parity = par;
  p.lambda = lambda;
  p.ell = ell;
  p.roots = characteristic_roots(m, lambda);
  const Eigen::Matrix2d M = boundary_matrix(m, lambda, par, ell, sigma);
  // Null vector from the row with the larger entries.
  const int r = M.row(0).cwiseAbs().sum() >= M.row(1).cwiseAbs().sum() ? 0 : 1;
  p.coef_big = M(r, 1);
  p.coef_small = -M(r, 0);
  if (p.coef_big == 0 && p.coef_small == 0) p.coef_small = 1.0;
  return p;
}

}  // namespace

std::size_t SpectrumTable::trusted_count() const {
  std::size_t n = 0;
  while (n < modes.size() && modes[n].lambda <= trusted_cutoff) ++n;
  return n;
}

std::optional<std::size_t> SpectrumTable::find(const ModeKey& key) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].key == key) return i;
  return std::nullopt;
}

std::size_t SpectrumTable::index_of(const ModeKey& key) const {
  if (auto i = find(key)) return *i;
  throw InvalidParameter("mode key", to_string(key) + " is not in the spectrum table");
}

SpectrumTable find_spectrum(const PlateParams& params, const SpectrumOptions& opt) {
  params.validate();
  if (opt.m_max < 1) throw InvalidParameter("m_max", "must be >= 1");
  if (opt.per_m < 1) throw InvalidParameter("per_m", "must be >= 1");
  if (opt.quad_nodes < 8) throw InvalidParameter("quad_nodes", "must be >= 8");
  if (opt.sweep_refinement < 1) throw InvalidParameter("sweep_refinement", "must be >= 1");

  SpectrumTable t;
  t.ell = params.ell;
  t.sigma = params.sigma;
  t.options = opt;
  const double sigma = params.sigma;
  t.trusted_cutoff = (1.0 - sigma * sigma) * std::pow(double(opt.m_max + 1), 4);

  for (int m = 1; m <= opt.m_max; ++m) {
    for (Parity par : {Parity::even, Parity::odd}) {
      const FamilyRoots fr = family_roots(m, par, params.ell, sigma, opt.per_m, opt.sweep_refinement);
      t.trusted_cutoff = std::min(t.trusted_cutoff, fr.lambdas.back());
      int branch = 1;
      for (double lam : fr.lambdas) {
        EigenMode mode;
        mode.key = {m, par, branch++};
        mode.lambda = lam;
        mode.psi = build_profile(m, par, lam, params.ell, sigma);
        const double n2 = y_inner(mode.psi, 0, mode.psi, 0, opt.quad_nodes);
        mode.l2_norm = std::sqrt(n2);
        mode.psi.coef_big /= mode.l2_norm;
        mode.psi.coef_small /= mode.l2_norm;
        // Sign convention psi(ell) > 0, falling back to psi'(ell) > 0.
        const double v = mode.psi.eval(params.ell, 0);
        const double dv = mode.psi.eval(params.ell, 1);
        const double scale = std::abs(mode.psi.coef_big) + std::abs(mode.psi.coef_small);
        const bool flip = std::abs(v) > 1e-12 * scale ? v < 0 : dv < 0;
        if (flip) {
          mode.psi.coef_big = -mode.psi.coef_big;
          mode.psi.coef_small = -mode.psi.coef_small;
        }
        t.modes.push_back(std::move(mode));
      }
    }
  }
  std::sort(t.modes.begin(), t.modes.end(), [](const EigenMode& a, const EigenMode& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.key < b.key;
  });
  t.lambda1 = t.modes.front().lambda;
  t.upsilon = coupling_upsilon(t);
  t.g_coeffs = project_forcing(params.forcing, t);
  return t;
}

SpectrumTable find_spectrum(const PlateParams& params, int m_max, int per_m) {
  SpectrumOptions o;
  o.m_max = m_max;
  o.per_m = per_m;
  return find_spectrum(params, o);
}

Eigen::MatrixXd coupling_upsilon(const SpectrumTable& table, int nodes) {
  if (nodes <= 0) nodes = table.options.quad_nodes;
  const std::size_t n = table.modes.size();
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const EigenMode &a = table.modes[i], &b = table.modes[j];
      if (a.key.m != b.key.m || a.key.parity == b.key.parity) continue;
      const double v = y_inner(a.psi, 1, b.psi, 0, nodes);
      const int nn = std::max(nodes_for(a.psi, nodes), nodes_for(b.psi, nodes));
      const double scale = 0.5 * pi *
          y_integral([&](double y) { return std::abs(a.psi.eval(y, 1) * b.psi.eval(y, 0)); },
                     table.ell, nn);
      U(i, j) = std::abs(v) < 1e-14 * scale ? 0.0 : v;
    }
  }
  return U;
}

Eigen::VectorXd project_forcing(const ForcingSpec& spec, const SpectrumTable& table) {
  spec.validate();
  const std::size_t n = table.modes.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  const int nodes = table.options.quad_nodes;
  auto psi_mean = [&](const EigenMode& w) {
    return y_integral([&](double y) { return w.psi.eval(y); }, table.ell, nodes_for(w.psi, nodes));
  };
  switch (spec.kind) {
    case ForcingSpec::Kind::none:
      break;
    case ForcingSpec::Kind::constant:
      for (std::size_t j = 0; j < n; ++j) {
        const EigenMode& w = table.modes[j];
        if (w.key.parity == Parity::odd || w.key.m % 2 == 0) continue;
        g[j] = spec.c * (2.0 / w.key.m) * psi_mean(w);
      }
      break;
    case ForcingSpec::Kind::harmonic:
      for (std::size_t j = 0; j < n; ++j) {
        const EigenMode& w = table.modes[j];
        if (w.key.parity == Parity::odd || w.key.m != spec.m) continue;
        g[j] = spec.c * 0.5 * pi * psi_mean(w);
      }
      break;
    case ForcingSpec::Kind::modal:
      for (const auto& [key, v] : spec.coefficients) g[table.index_of(key)] += v;
      break;
  }
  return g;
}

Eigen::MatrixXd gradient_y_gram(const SpectrumTable& table, std::span<const std::size_t> idx) {
  const std::size_t n = idx.size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const EigenMode &wi = table.modes[idx[a]], &wj = table.modes[idx[b]];
      if (wi.key.m != wj.key.m || wi.key.parity != wj.key.parity) continue;
      G(a, b) = G(b, a) = y_inner(wi.psi, 1, wj.psi, 1, table.options.quad_nodes);
    }
  return G;
}

ModeResidual mode_residual(const EigenMode& mode, double sigma, int grid) {
  const PsiProfile& p = mode.psi;
  const double m2 = double(mode.key.m) * mode.key.m, m4 = m2 * m2;
  double num = 0, den = 0, s1 = 0, s2 = 0;
  for (int i = 0; i < grid; ++i) {
    const double y = -p.ell + 2.0 * p.ell * i / (grid - 1);
    const auto d = p.derivatives(y);
    num = std::max(num, std::abs(d[4] - 2 * m2 * d[2] + (m4 - mode.lambda) * d[0]));
    den = std::max(den, std::abs(d[4]) + 2 * m2 * std::abs(d[2]) + std::abs(m4 - mode.lambda) * std::abs(d[0]));
    s1 = std::max(s1, std::abs(d[2]) + sigma * m2 * std::abs(d[0]));
    s2 = std::max(s2, std::abs(d[3]) + (2 - sigma) * m2 * std::abs(d[1]));
  }
  ModeResidual r;
  r.ode = den > 0 ? num / den : num;
  for (double y : {-p.ell, p.ell}) {
    const auto d = p.derivatives(y);
    const auto rows = boundary_rows(mode.key.m, sigma, d[0], d[1], d[2], d[3]);
    r.boundary = std::max(r.boundary, std::abs(rows[0]) / (s1 > 0 ? s1 : 1.0));
    r.boundary = std::max(r.boundary, std::abs(rows[1]) / (s2 > 0 ? s2 : 1.0));
  }
  return r;
}

std::string spectrum_csv(const SpectrumTable& table) {
  std::string s = "m,parity,branch,lambda,l2norm\n";
  for (const EigenMode& w : table.modes)
    s += fmt::format("{},{},{},{:.17g},{:.17g}\n", w.key.m, to_string(w.key.parity), w.key.branch,
                     w.lambda, w.l2_norm);
  return s;
}

nlohmann::json modes_json(const SpectrumTable& table) {
  nlohmann::json modes = nlohmann::json::array();
  for (const EigenMode& w : table.modes) {
    const PsiProfile& p = w.psi;
    nlohmann::json j;
    j["m"] = w.key.m;
    j["parity"] = to_string(w.key.parity);
    j["branch"] = w.key.branch;
    j["lambda"] = w.lambda;
    j["l2norm"] = w.l2_norm;
    j["root_branch"] = to_string(p.roots.branch);
    j["r2_plus"] = p.roots.r2_plus;
    j["r2_minus"] = p.roots.r2_minus;
    j["big_root"] = p.roots.big();
    j["small_root"] = p.roots.small();
    j["coef_big"] = p.coef_big;
    j["coef_small"] = p.coef_small;
    modes.push_back(std::move(j));
  }
  nlohmann::json out;
  out["ell"] = table.ell;
  out["sigma"] = table.sigma;
  out["lambda1"] = table.lambda1;
  out["trusted_cutoff"] = table.trusted_cutoff;
  out["basis"] = {
      {"big", "even: cosh(a y)/cosh(a ell); odd: sinh(a y)/cosh(a ell)"},
      {"small_below", "even: cosh(b y)/cosh(b ell); odd: sinh(b y)/(b cosh(b ell))"},
      {"small_degenerate", "even: 1; odd: y"},
      {"small_above", "even: cos(c y); odd: sin(c y)/c"}};
  out["modes"] = std::move(modes);
  return out;
}

}  // namespace platelab
