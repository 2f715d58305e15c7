#include "platelab/duffing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "platelab/errors.hpp"
#include "platelab/ode.hpp"
#include "platelab/parallel.hpp"

namespace platelab {

void DuffingParams::validate() const {
  if (m < 1) throw InvalidParameter("m", "must be >= 1");
  if (!(k >= 0) || !std::isfinite(k)) throw InvalidParameter("k", "must be finite and >= 0");
  if (!(R2 > 0) || !std::isfinite(R2)) throw InvalidParameter("R2", "must be finite and > 0");
}

std::string to_string(DuffingLimit l) {
  switch (l) {
    case DuffingLimit::minus: return "-1";
    case DuffingLimit::zero: return "0";
    case DuffingLimit::plus: return "+1";
    case DuffingLimit::undecided: return "undecided";
  }
  return "undecided";
}

double duffing_r2(const UnimodalEquilibrium& U, const PlateParams& params) {
  const PsiSolution& s = U.psi;
  const int nodes = 64 * int(std::max(1.0, std::ceil(s.stiffness() / 16.0)));
  // int U_x^2 = m^2 amp^2 (pi/2) int psi^2
  const double ux2 = double(U.m) * U.m * U.amplitude * U.amplitude * (std::numbers::pi / 2.0) *
                     y_integral([&](double y) { const double v = s.eval(y); return v * v; }, s.ell, nodes);
  return params.S * ux2 / (double(U.m) * U.m);
}

double duffing_energy(const DuffingParams& p, double phi, double dphi) {
  const double p2 = phi * phi;
  return 0.5 * dphi * dphi + p.stiffness() * (0.25 * p2 * p2 - 0.5 * p2);
}

bool nonzero_limit_predicate(double phi0, double dphi0, const DuffingParams& p) {
  const double p2 = phi0 * phi0;
  return 2.0 * dphi0 * dphi0 + p.stiffness() * (p2 * p2 - 2.0 * p2) < 0;
}

DuffingTrajectory integrate_duffing(const DuffingParams& p, double phi0, double dphi0, double t_final,
                                    const DuffingOptions& opt) {
  p.validate();
  if (!(t_final > 0)) throw InvalidParameter("t_final", "must be > 0");
  DuffingTrajectory tr;
  tr.p = p;
  const double K = p.stiffness();
  const double E0 = duffing_energy(p, phi0, dphi0);
  const double escale = std::max(1.0, std::abs(E0));
  const double dwell = opt.dwell_time > 0 ? opt.dwell_time : (p.k > 0 ? 10.0 / p.k : 0.0);

  auto rhs = [&](const ode::State& y, ode::State& dy, double) {
    dy[0] = y[1];
    dy[1] = -p.k * y[1] - K * (y[0] * y[0] * y[0] - y[0]);
  };
  auto push = [&](double t, double a, double b) {
    if (!opt.keep_samples) return;
    tr.t.push_back(t);
    tr.phi.push_back(a);
    tr.dphi.push_back(b);
    tr.energy.push_back(duffing_energy(p, a, b));
  };
  push(0.0, phi0, dphi0);

  double diss = 0;  // k int phi'^2
  double last_E = E0;
  int zone = 99;    // index of the equilibrium ball currently occupied (-1, 0, 1) or 99
  double entered = 0;
  auto which = [&](double a, double b) {
    for (int z : {-1, 0, 1})
      if (std::hypot(a - z, b) <= opt.dwell_radius) return z;
    return 99;
  };
  zone = which(phi0, dphi0);

  ode::State y{phi0, dphi0}, buf;
  ode::Options o;
  o.abs_tol = o.rel_tol = opt.tol;
  ode::GridSampler sampler(0.0, t_final, opt.stride);
  auto sum = ode::integrate_adaptive(rhs, y, 0.0, t_final, o, [&](const ode::StepView& v) {
    const double h = (v.t1 - v.t0) / 4;
    double s = v.y0[1] * v.y0[1] + v.y1[1] * v.y1[1];
    for (int i = 1; i < 4; ++i) {
      v.evaluate(v.t0 + i * h, buf);
      s += ((i % 2) ? 4.0 : 2.0) * buf[1] * buf[1];
    }
    diss += p.k * s * h / 3;
    const double E1 = duffing_energy(p, v.y1[0], v.y1[1]);
    tr.dissipation_residual = std::max(tr.dissipation_residual, std::abs(E1 - E0 + diss) / escale);
    tr.energy_increase = std::max(tr.energy_increase, (E1 - last_E) / escale);
    last_E = E1;
    sampler.consume(v, [&](double t, const ode::State& ys) { push(t, ys[0], ys[1]); });

    const int z = which(v.y1[0], v.y1[1]);
    if (z != zone) {
      zone = z;
      entered = v.t1;
    }
    if (zone != 99 && p.k > 0 && v.t1 - entered >= dwell) {
      tr.limit = static_cast<DuffingLimit>(zone);
      tr.decided_at = v.t1;
      return !opt.stop_when_decided;
    }
    return true;
  });
  tr.t_end = sum.t_end;
  return tr;
}

HeteroclinicReport heteroclinic_family(const std::vector<int>& n_list, const DuffingParams& p, double t_final,
                                       const DuffingOptions& opt) {
  HeteroclinicReport r;
  r.all_plus = r.all_negative_energy = !n_list.empty();
  for (int n : n_list) {
    if (n < 1) throw InvalidParameter("n", "must be >= 1");
    HeteroclinicMember mbr;
    mbr.n = n;
    mbr.phi0 = 1.0 / n;
    mbr.initial_energy = duffing_energy(p, mbr.phi0, 0.0);
    DuffingOptions o = opt;
    o.keep_samples = false;
    mbr.limit = integrate_duffing(p, mbr.phi0, 0.0, t_final, o).limit;
    r.all_plus = r.all_plus && mbr.limit == DuffingLimit::plus;
    r.all_negative_energy = r.all_negative_energy && mbr.initial_energy < 0;
    r.members.push_back(mbr);
  }
  return r;
}

nlohmann::json heteroclinic_json(const HeteroclinicReport& r) {
  nlohmann::json j;
  j["all_plus"] = r.all_plus;
  j["all_negative_energy"] = r.all_negative_energy;
  j["members"] = nlohmann::json::array();
  for (const auto& m : r.members)
    j["members"].push_back(
        {{"n", m.n}, {"phi0", m.phi0}, {"initial_energy", m.initial_energy}, {"limit", to_string(m.limit)}});
  return j;
}

BasinMap basin_map(const DuffingParams& p, const BasinSpec& spec, const DuffingOptions& opt) {
  p.validate();
  if (spec.n_phi < 1 || spec.n_dphi < 1) throw InvalidParameter("basin.grid", "need at least one point per axis");
  BasinMap b;
  b.spec = spec;
  auto axis = [](double lo, double hi, int n, int i) { return n == 1 ? lo : lo + (hi - lo) * double(i) / (n - 1); };
  const std::size_t total = std::size_t(spec.n_phi) * std::size_t(spec.n_dphi);
  b.phi0.resize(total);
  b.dphi0.resize(total);
  b.label.resize(total);
  std::vector<double> diss(total), incr(total);
  DuffingOptions o = opt;
  o.keep_samples = false;
  o.stop_when_decided = true;
  parallel_for(total, spec.threads, [&](std::size_t idx) {
    const int i = int(idx % std::size_t(spec.n_phi)), j = int(idx / std::size_t(spec.n_phi));
    const double a = axis(spec.phi_lo, spec.phi_hi, spec.n_phi, i);
    const double d = axis(spec.dphi_lo, spec.dphi_hi, spec.n_dphi, j);
    const auto tr = integrate_duffing(p, a, d, spec.t_final, o);
    b.phi0[idx] = a;
    b.dphi0[idx] = d;
    b.label[idx] = tr.limit;
    diss[idx] = tr.dissipation_residual;
    incr[idx] = tr.energy_increase;
  });
  for (std::size_t idx = 0; idx < total; ++idx) {
    switch (b.label[idx]) {
      case DuffingLimit::minus: ++b.count_minus; break;
      case DuffingLimit::zero: ++b.count_zero; break;
      case DuffingLimit::plus: ++b.count_plus; break;
      case DuffingLimit::undecided: ++b.count_undecided; break;
    }
    if (nonzero_limit_predicate(b.phi0[idx], b.dphi0[idx], p)) {
      const DuffingLimit want = b.phi0[idx] > 0 ? DuffingLimit::plus : DuffingLimit::minus;
      if (b.label[idx] != want) ++b.predicate_violations;
    }
    b.max_dissipation_residual = std::max(b.max_dissipation_residual, diss[idx]);
    b.max_energy_increase = std::max(b.max_energy_increase, incr[idx]);
  }
  return b;
}

std::string basin_csv(const BasinMap& b) {
  std::string s = "phi0,dphi0,label\n";
  for (std::size_t i = 0; i < b.label.size(); ++i) {
    const int l = b.label[i] == DuffingLimit::undecided ? 2 : int(b.label[i]);
    s += fmt::format("{:.17g},{:.17g},{}\n", b.phi0[i], b.dphi0[i], l);
  }
  return s;
}

std::string duffing_csv(const DuffingTrajectory& tr) {
  std::string s = "t,phi,dphi,energy\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    s += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", tr.t[i], tr.phi[i], tr.dphi[i], tr.energy[i]);
  return s;
}

CrossValidation cross_validate_full(const UnimodalEquilibrium& U, double phi0, double dphi0,
                                    const PlateParams& params, const SpectrumTable& table,
                                    const TruncationSpec& trunc, double t_final, double max_rel_projection) {
  if (!params.forcing.is_zero()) throw InvalidParameter("forcing", "the unimodal reduction needs g = 0");
  if (params.alpha != U.alpha) throw InvalidParameter("alpha", "params.alpha differs from the equilibrium's alpha");
  trunc.validate(table);
  CrossValidation cv;
  cv.tol = std::max(trunc.abs_tol, trunc.rel_tol);
  const ModalSystem sys(params, table, trunc.keys);
  const Eigen::VectorXd c = unimodal_coefficients(U, table, trunc.keys);
  cv.projection_error = unimodal_projection_error(U, table, trunc.keys);
  const double unorm = std::sqrt(c.dot(sys.lambda().cwiseProduct(c))) + cv.projection_error;
  if (cv.projection_error > max_rel_projection * unorm) {
    int same = 0;
    for (const auto& k : trunc.keys) same += k.m == U.m;
    throw InvalidParameter("truncation",
                           fmt::format("projection error {:.3g} exceeds {:.3g}; add modes with m={} (have {})",
                                       cv.projection_error, max_rel_projection * unorm, U.m, same));
  }

  DuffingParams dp{U.m, params.k, duffing_r2(U, params)};
  DuffingOptions dopt;
  dopt.tol = cv.tol;
  dopt.stride = trunc.stride;
  dopt.stop_when_decided = false;
  const DuffingTrajectory duf = integrate_duffing(dp, phi0, dphi0, t_final, dopt);
  cv.duffing_limit = duf.limit;

  ModalState init;
  init.h = phi0 * c;
  init.hdot = dphi0 * c;
  const Trajectory tr = integrate(init, 0.0, t_final, trunc, params, table);
  const std::size_t n = std::min(tr.size(), duf.t.size());
  for (std::size_t i = 0; i < n; ++i) {
    const ModalState& s = tr.samples[i];
    ModalState ref;
    ref.h = duf.phi[i] * c;
    ref.hdot = duf.dphi[i] * c;
    const Eigen::VectorXd dh = s.h - ref.h, dv = s.hdot - ref.hdot;
    const double d = std::sqrt(dh.dot(sys.lambda().cwiseProduct(dh)) + dv.squaredNorm());
    cv.t.push_back(s.t);
    cv.discrepancy_series.push_back(d);
    cv.discrepancy = std::max(cv.discrepancy, d);
    for (std::size_t j = 0; j < sys.size(); ++j)
      if (sys.keys()[j].m != U.m)
        cv.leakage = std::max(cv.leakage, std::abs(s.h[Eigen::Index(j)]) + std::abs(s.hdot[Eigen::Index(j)]));
  }
  const ModalState& last = tr.samples.back();
  const double cn = std::sqrt(c.dot(sys.lambda().cwiseProduct(c)));
  double best = 1e300;
  for (int z : {-1, 0, 1}) {
    const double d = y_distance(sys, last, double(z) * c);
    if (d < best) {
      best = d;
      cv.galerkin_limit = d <= 1e-2 * cn ? static_cast<DuffingLimit>(z) : DuffingLimit::undecided;
    }
  }
  return cv;
}

}  // namespace platelab
