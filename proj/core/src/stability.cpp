#include "platelab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "platelab/errors.hpp"
#include "platelab/parallel.hpp"

namespace platelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double g_modal_norm(const ModalSystem& sys) { return sys.g().norm(); }

// F(h) = max over h' of dV/dt + eta V, with its gradient and Hessian.
struct RateModel {
  const ModalSystem& sys;
  double nu, eta, c2;
  Eigen::MatrixXd A, M, Us, B, BtB;

  RateModel(const ModalSystem& s, double nu_, double eta_) : sys(s), nu(nu_), eta(eta_) {
    const PlateParams& p = sys.params();
    c2 = nu - p.k + eta / 2;
    const Eigen::Index n = Eigen::Index(sys.size());
    A = sys.lambda().asDiagonal();
    M = sys.m2().asDiagonal();
    Us = sys.upsilon() + sys.upsilon().transpose();
    B = p.alpha * sys.upsilon().transpose() + eta * nu * Eigen::MatrixXd::Identity(n, n);
    BtB = B.transpose() * B;
  }

  double value(const Eigen::VectorXd& h) const {
    const PlateParams& p = sys.params();
    const double q = h.dot(M * h);
    const double r = (eta / 2 - nu) * h.dot(A * h) + (eta / 4 - nu) * p.S * q * q + (nu - eta / 2) * p.P * q +
                     nu * p.alpha * 0.5 * h.dot(Us * h) + (nu - eta) * sys.g().dot(h) + eta * nu * p.k / 2 * h.squaredNorm();
    return r - h.dot(BtB * h) / (4 * c2);
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& h) const {
    const PlateParams& p = sys.params();
    const double q = h.dot(M * h);
    return (eta - 2 * nu) * (A * h) + ((eta - 4 * nu) * p.S * q + (2 * nu - eta) * p.P) * (M * h) +
           nu * p.alpha * (Us * h) + (nu - eta) * sys.g() + eta * nu * p.k * h - BtB * h / (2 * c2);
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& h) const {
    const PlateParams& p = sys.params();
    const double q = h.dot(M * h);
    const Eigen::VectorXd Mh = M * h;
    const Eigen::Index n = h.size();
    return (eta - 2 * nu) * A + (eta - 4 * nu) * p.S * (q * M + 2 * Mh * Mh.transpose()) + (2 * nu - eta) * p.P * M +
           nu * p.alpha * Us + eta * nu * p.k * Eigen::MatrixXd::Identity(n, n) - BtB / (2 * c2);
  }
  Eigen::VectorXd best_hdot(const Eigen::VectorXd& h) const { return -(B * h) / (2 * c2); }
};

// Newton ascent on F with a Levenberg shift that keeps the step an ascent direction.
bool ascend(const RateModel& F, Eigen::VectorXd& h, double& val) {
  val = F.value(h);
  const Eigen::Index n = h.size();
  double shift = 0;
  for (int it = 0; it < 500; ++it) {
    const Eigen::VectorXd g = F.grad(h);
    const Eigen::MatrixXd negH = -F.hess(h);
    const double hn = negH.norm();
    if (g.norm() <= 1e-12 * (hn * h.norm() + std::abs(val) / (1 + h.norm()) + 1)) return true;
    bool moved = false;
    for (int tries = 0; tries < 80 && !moved; ++tries) {
      Eigen::LLT<Eigen::MatrixXd> llt(negH + shift * hn * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd trial = h + llt.solve(g);
        const double v = F.value(trial);
        if (v > val) {
          h = trial;
          val = v;
          moved = true;
          shift *= 0.25;
          if (shift < 1e-14) shift = 0;
          break;
        }
      }
      shift = shift == 0 ? 1e-10 : shift * 4;
    }
    if (!moved) return true;
  }
  return false;
}

}  // namespace

ThresholdReport thresholds(const PlateParams& params, double lambda1, const ThresholdQuery& q) {
  params.validate();
  const double k = params.k, P = params.P, s2 = 1.0 - params.sigma * params.sigma;
  if (!(k > 0)) throw InvalidParameter("k", "must be > 0");
  if (!(P >= 0 && P < lambda1)) throw InvalidParameter("P", "need 0 <= P < lambda1");
  if (!(q.nu > 0 && q.nu <= k / 2)) throw InvalidParameter("nu", "need 0 < nu <= k/2");
  if (!(q.delta > 0 && q.delta < (k - q.nu) / 2)) throw InvalidParameter("delta", "need 0 < delta < (k - nu)/2");
  if (!(q.nu * q.nu <= lambda1 - P)) throw InvalidParameter("nu", "need nu^2 <= lambda1 - P");
  ThresholdReport r;
  r.lambda1 = lambda1;
  r.gamma = (k - q.nu) / 2 - q.delta;
  if (q.gamma != 0 && std::abs(q.gamma - r.gamma) > 1e-12 * std::max(1.0, r.gamma))
    throw InvalidParameter("gamma", "must equal (k - nu)/2 - delta");
  const double L = lambda1 - P;
  r.alpha_bound_general = std::sqrt(std::max(0.0, 4 * q.delta * s2 * q.nu * (L - q.nu * k + q.nu * q.nu) / lambda1));
  r.case_a = k * k <= 2 * L;
  r.case_b = k * k >= 2 * L;
  r.alpha_bound_g0_caseA = r.case_a ? k * std::sqrt(s2 / (2 * lambda1) * (L - k * k / 4)) : kNaN;
  r.alpha_bound_g0_caseB = r.case_b ? std::sqrt(s2 / (2 * lambda1)) * L : kNaN;
  r.nu_caseB = r.case_b ? k / 2 - 0.5 * std::sqrt(std::max(0.0, k * k - 2 * L)) : kNaN;
  const double g = forcing_l2_norm(params.forcing, params);
  r.vnu_limsup = g * g / (2 * q.nu * (k - q.nu - 2 * q.delta));
  r.trivial_uniqueness_bound = L * std::sqrt(2 * s2) / std::sqrt(lambda1);
  r.alpha_compliant = std::abs(params.alpha) <= r.alpha_bound_general;
  return r;
}

nlohmann::json thresholds_json(const ThresholdReport& r) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return {{"lambda1", r.lambda1},
          {"gamma", r.gamma},
          {"alpha_bound_general", r.alpha_bound_general},
          {"case_a", r.case_a},
          {"case_b", r.case_b},
          {"alpha_bound_g0_caseA", num(r.alpha_bound_g0_caseA)},
          {"alpha_bound_g0_caseB", num(r.alpha_bound_g0_caseB)},
          {"nu_caseB", num(r.nu_caseB)},
          {"vnu_limsup", r.vnu_limsup},
          {"trivial_uniqueness_bound", r.trivial_uniqueness_bound},
          {"alpha_compliant", r.alpha_compliant}};
}

VnuCheck verify_vnu_bound(const Trajectory& traj, const SpectrumTable& table, const ThresholdQuery& q) {
  const PlateParams& p = traj.meta.params;
  const ModalSystem sys(p, table, traj.meta.truncation.keys);
  VnuCheck c;
  try {
    c.compliant = thresholds(p, table.lambda1, q).alpha_compliant;
  } catch (const InvalidParameter&) {
    c.compliant = false;
  }
  const double g = g_modal_norm(sys);
  c.limsup_bound = g * g / (2 * q.nu * (p.k - q.nu - 2 * q.delta));
  const std::size_t n = traj.size();
  std::vector<double> V(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    V[i] = sys.energy(traj.samples[i].h, traj.samples[i].hdot, q.nu).V_nu;
    t[i] = traj.samples[i].t;
    c.scale = std::max(c.scale, std::abs(V[i]));
  }
  c.scale = std::max(1.0, c.scale);
  c.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= j; ++i) {
      const double e = std::exp(-q.nu * (t[j] - t[i]));
      worst = std::min(worst, e * V[i] + (1 - e) * c.limsup_bound - V[j]);
    }
    c.t.push_back(t[j]);
    c.margin.push_back(worst);
    c.min_margin = std::min(c.min_margin, worst);
  }
  c.pass = c.min_margin >= -1e-8 * c.scale;
  return c;
}

std::string margin_csv(const VnuCheck& c) {
  std::string s = "t,margin\n";
  for (std::size_t i = 0; i < c.t.size(); ++i) s += fmt::format("{:.17g},{:.17g}\n", c.t[i], c.margin[i]);
  return s;
}

AsymptoticBounds asymptotic_bounds(const PlateParams& params, double lambda1, double nu, double V) {
  if (!(V >= 0)) throw InvalidParameter("Vnu_inf", "must be >= 0");
  if (!(params.P < lambda1)) throw InvalidParameter("P", "must be < lambda1");
  const double L = lambda1 - params.P, S = params.S;
  AsymptoticBounds b;
  b.Psi = 4 * V / (std::sqrt(L * L + 4 * S * V) + L);
  b.ux_bound = (4 * V + 2 * nu * nu * b.Psi) / (std::sqrt(L * L + 2 * S * (2 * V + nu * nu * b.Psi)) + L);
  b.H2_bound = 2 * lambda1 / L * (V + nu * nu * b.Psi / 2);
  return b;
}

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::fitted: return "fitted";
    case FitStatus::exact_equilibrium: return "exact_equilibrium";
    case FitStatus::refused: return "refused";
  }
  return "refused";
}

DecayFit fit_decay(const Trajectory& traj, const ModalSystem& sys, const Eigen::VectorXd& target,
                   const DecayOptions& opt) {
  DecayFit f;
  const std::size_t n = traj.size();
  std::vector<double> d(n);
  double dmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = y_distance(sys, traj.samples[i], target);
    dmax = std::max(dmax, d[i]);
  }
  if (n == 0 || dmax == 0) {
    f.status = FitStatus::exact_equilibrium;
    f.reason = "distance identically zero";
    return f;
  }
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] >= opt.floor * dmax) valid.push_back(i);
  const std::size_t start = std::size_t(std::floor((1.0 - opt.tail_fraction) * double(valid.size())));
  std::vector<double> ts, ls;
  for (std::size_t k = start; k < valid.size(); ++k) {
    ts.push_back(traj.samples[valid[k]].t);
    ls.push_back(std::log(d[valid[k]]));
  }
  f.n_used = ts.size();
  if (ts.size() < 10) {
    f.reason = "fewer than 10 samples above the floor in the tail";
    return f;
  }
  f.t_begin = ts.front();
  f.t_end = ts.back();
  // chunk maxima must not rise
  const int nc = std::max(2, opt.chunks);
  double prev = std::numeric_limits<double>::infinity();
  for (int c = 0; c < nc; ++c) {
    const std::size_t a = ts.size() * std::size_t(c) / std::size_t(nc), b = ts.size() * std::size_t(c + 1) / std::size_t(nc);
    if (a >= b) continue;
    const double mx = *std::max_element(ls.begin() + long(a), ls.begin() + long(b));
    if (mx > prev + opt.monotone_slack) {
      f.reason = fmt::format("tail not monotone: chunk {} max rises by {:.3g}", c, mx - prev);
      return f;
    }
    prev = mx;
  }
  const double N = double(ts.size());
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sl += ls[i];
    stt += ts[i] * ts[i];
    stl += ts[i] * ls[i];
  }
  const double slope = (N * stl - st * sl) / (N * stt - st * st);
  const double icpt = (sl - slope * st) / N;
  double rss = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) rss += std::pow(ls[i] - (icpt + slope * ts[i]), 2);
  f.residual = std::sqrt(rss / N);
  f.eta = -slope;
  if (f.residual > opt.max_residual) {
    f.reason = fmt::format("fit residual {:.3g} above {:.3g}", f.residual, opt.max_residual);
    return f;
  }
  f.status = FitStatus::fitted;
  return f;
}

double linear_mode_rate(double k, double lambda) {
  const double disc = k * k - 4 * lambda;
  return disc < 0 ? k / 2 : (k - std::sqrt(disc)) / 2;
}

SandwichConstants sandwich_constants(const ModalSystem& sys, double lambda1, double nu) {
  const PlateParams& p = sys.params();
  const double g = g_modal_norm(sys);
  const double w = nu * std::max(1.0, 1.0 / lambda1);
  const bool pre = p.P != 0;
  if (pre && !(p.S > 0)) throw InvalidParameter("S", "must be > 0 when P != 0");
  SandwichConstants c;
  c.c0 = (pre ? 0.5 : 1.0) - 0.125 - w;
  c.c1 = 2.0 + (pre ? 0.5 : 0.0) + w + nu * p.k / lambda1;
  const double pterm = pre ? p.P * p.P / (2 * p.S) : 0.0;
  c.c2 = 4 * g * g / lambda1 + pterm;
  if (!(c.c0 > 0)) throw InvalidParameter("nu", "too large for a positive lower sandwich constant");
  return c;
}

ModalState random_state(const ModalSystem& sys, double norm, std::uint64_t seed) {
  const Eigen::Index n = Eigen::Index(sys.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01;
  Eigen::VectorXd z(2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) z(i) = N01(rng);
  z *= norm / z.norm();
  ModalState s;
  s.h = z.head(n).cwiseQuotient(sys.lambda().cwiseSqrt());
  s.hdot = z.tail(n);
  return s;
}

double gronwall_rate(const ModalSystem& sys, double nu, double eta, const ModalState& s) {
  const PlateParams& p = sys.params();
  const Eigen::VectorXd& h = s.h;
  const Eigen::VectorXd& v = s.hdot;
  const double q = h.dot(sys.m2().cwiseProduct(h));
  const double a = h.dot(sys.lambda().cwiseProduct(h));
  const double dV = (nu - p.k) * v.squaredNorm() + p.alpha * sys.coupling(h, v) +
                    nu * (-a - p.S * q * q + p.P * q + p.alpha * sys.coupling(h, h) + sys.g().dot(h));
  return dV + eta * sys.energy(h, v, nu).V_nu_k;
}

GronwallSup gronwall_sup(const ModalSystem& sys, double nu, double eta, int starts, std::uint64_t seed,
                         const std::vector<Eigen::VectorXd>& extra_starts) {
  const PlateParams& p = sys.params();
  if (!(p.S > 0)) throw InvalidParameter("S", "must be > 0 for a finite supremum");
  if (!(nu > 0 && eta > 0 && eta < 4 * nu)) throw InvalidParameter("eta", "need 0 < eta < 4 nu");
  if (!(nu + eta / 2 < p.k)) throw InvalidParameter("nu", "need nu + eta/2 < k");
  const RateModel F(sys, nu, eta);
  const Eigen::Index n = Eigen::Index(sys.size());
  std::vector<Eigen::VectorXd> x0 = extra_starts;
  x0.push_back(Eigen::VectorXd::Zero(n));
  for (int i = 0; i < starts; ++i) {
    std::mt19937_64 rng(subtask_seed(seed, std::size_t(i)));
    std::normal_distribution<double> N01;
    Eigen::VectorXd z(n);
    for (auto& c : z) c = N01(rng);
    // H^2_* radii spread geometrically over 1e-2 .. 1e3
    const double radius = std::pow(10.0, -2 + 5.0 * (i + 0.5) / std::max(1, starts));
    x0.push_back(radius / z.norm() * z.cwiseQuotient(sys.lambda().cwiseSqrt()));
  }
  GronwallSup out;
  out.C = -std::numeric_limits<double>::infinity();
  for (Eigen::VectorXd h : x0) {
    double v = 0;
    out.converged += ascend(F, h, v);
    ++out.starts;
    if (v > out.C) {
      out.C = v;
      out.argmax.h = h;
      out.argmax.hdot = F.best_hdot(h);
    }
  }
  return out;
}

double calibrate_gronwall_constant(const std::vector<Trajectory>& trajs, double eta) {
  double C = 0;
  for (const Trajectory& tr : trajs) {
    const double V0 = tr.energies.front().V_nu_k;
    const double t0 = tr.samples.front().t;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      const double e = std::exp(-eta * (tr.samples[i].t - t0));
      C = std::max(C, eta * (tr.energies[i].V_nu_k - V0 * e) / (1 - e));
    }
  }
  return C;
}

AbsorbingBallReport absorbing_check(const PlateParams& params, const SpectrumTable& table,
                                    const TruncationSpec& trunc, const AbsorbingOptions& opt) {
  params.validate_stretching();
  if (!(params.k > 0)) throw InvalidParameter("k", "must be > 0");
  if (!(opt.nu > 0 && opt.nu < params.k / 2)) throw InvalidParameter("nu", "need 0 < nu < k/2");
  trunc.validate(table);
  const ModalSystem sys(params, table, trunc.keys);
  AbsorbingBallReport r;
  r.nu = opt.nu;
  r.eta = opt.eta > 0 ? opt.eta : opt.nu;
  r.sandwich = sandwich_constants(sys, table.lambda1, opt.nu);

  auto norms = [&](int count, double lo, double hi) {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(count == 1 ? hi : lo * std::pow(hi / lo, double(i) / (count - 1)));
    return v;
  };
  auto run_set = [&](const std::vector<double>& ns, std::uint64_t base) {
    std::vector<Trajectory> out(ns.size());
    parallel_for(ns.size(), opt.threads, [&](std::size_t i) {
      const ModalState s0 = random_state(sys, ns[i], subtask_seed(base, i));
      IntegrateOptions io;
      io.nu = opt.nu;
      out[i] = integrate(s0, 0.0, opt.t_final, trunc, params, table, io);
    });
    return out;
  };

  const auto cal_norms = norms(opt.calibration_runs, opt.cal_norm_lo, opt.cal_norm_hi);
  const auto bat_norms = norms(opt.battery_runs, opt.norm_lo, opt.norm_hi);
  const auto cal = run_set(cal_norms, splitmix64(opt.seed ^ 0xca1bULL));
  r.C_trajectories = calibrate_gronwall_constant(cal, r.eta);
  // calibration states also seed the phase-space search
  std::vector<Eigen::VectorXd> seeds;
  for (const auto& tr : cal)
    for (std::size_t i = 0; i < tr.size(); i += std::max<std::size_t>(1, tr.size() / 8)) seeds.push_back(tr.samples[i].h);
  r.C = std::max(0.0, gronwall_sup(sys, opt.nu, r.eta, opt.sup_starts, splitmix64(opt.seed ^ 0x5a9ULL), seeds).C);
  r.level = 1 + r.C / r.eta;
  r.level_empirical = 1 + r.C_trajectories / r.eta;
  const auto bat = run_set(bat_norms, splitmix64(opt.seed ^ 0xba77ULL));

  auto assess = [&](const Trajectory& tr, double norm) {
    AbsorbingRun a;
    a.initial_norm = norm;
    a.V0 = tr.energies.front().V_nu_k;
    a.balll_margin = std::numeric_limits<double>::infinity();
    a.sandwich_margin = std::numeric_limits<double>::infinity();
    a.contained = true;
    const double scale = std::max(1.0, std::abs(a.V0));
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const EnergyReport& e = tr.energies[i];
      const double t = tr.samples[i].t;
      const double ex = std::exp(-r.eta * t);
      a.balll_margin = std::min(a.balll_margin, (a.V0 * ex + r.C / r.eta * (1 - ex) - e.V_nu_k) / scale);
      const double lo = r.sandwich.c0 * e.E_plus - r.sandwich.c2, hi = r.sandwich.c1 * e.E_plus + r.sandwich.c2;
      a.sandwich_margin = std::min(a.sandwich_margin, std::min(e.V_nu_k - lo, hi - e.V_nu_k) / std::max(1.0, e.E_plus));
      if (a.entry_time_empirical < 0 && e.V_nu_k <= r.level_empirical) a.entry_time_empirical = t;
      if (a.entry_time < 0) {
        if (e.V_nu_k <= r.level) a.entry_time = t;
      } else if (e.V_nu_k > r.level) {
        a.contained = false;
        if (r.witness.empty())
          r.witness = fmt::format("norm {:.3g}: V={:.6g} > level {:.6g} at t={:.4g}", norm, e.V_nu_k, r.level, t);
      }
    }
    if (a.entry_time < 0) a.contained = false;
    a.V_final = tr.energies.back().V_nu_k;
    return a;
  };
  for (std::size_t i = 0; i < cal.size(); ++i) r.calibration.push_back(assess(cal[i], cal_norms[i]));
  r.witness.clear();
  r.all_entered = r.all_contained = r.balll_holds = r.sandwich_holds = r.all_entered_empirical = true;
  for (std::size_t i = 0; i < bat.size(); ++i) {
    AbsorbingRun a = assess(bat[i], bat_norms[i]);
    r.all_entered = r.all_entered && a.entry_time >= 0;
    r.all_contained = r.all_contained && a.contained;
    r.all_entered_empirical = r.all_entered_empirical && a.entry_time_empirical >= 0;
    r.balll_holds = r.balll_holds && a.balll_margin >= -1e-9;
    r.sandwich_holds = r.sandwich_holds && a.sandwich_margin >= -1e-12;
    if (r.witness.empty() && a.balll_margin < -1e-9)
      r.witness = fmt::format("norm {:.3g}: integrated bound violated by {:.3g} (relative)", a.initial_norm,
                              -a.balll_margin);
    r.battery.push_back(a);
  }
  return r;
}

nlohmann::json absorbing_json(const AbsorbingBallReport& r) {
  auto runs = [](const std::vector<AbsorbingRun>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : v)
      a.push_back({{"initial_norm", x.initial_norm},
                   {"V0", x.V0},
                   {"entry_time", x.entry_time},
                   {"entry_time_empirical", x.entry_time_empirical},
                   {"V_final", x.V_final},
                   {"contained", x.contained},
                   {"balll_margin", x.balll_margin},
                   {"sandwich_margin", x.sandwich_margin}});
    return a;
  };
  return {{"nu", r.nu},
          {"eta", r.eta},
          {"C", r.C},
          {"C_trajectories", r.C_trajectories},
          {"level", r.level},
          {"level_empirical", r.level_empirical},
          {"all_entered_empirical", r.all_entered_empirical},
          {"sandwich", {{"c0", r.sandwich.c0}, {"c1", r.sandwich.c1}, {"c2", r.sandwich.c2}}},
          {"all_entered", r.all_entered},
          {"all_contained", r.all_contained},
          {"balll_holds", r.balll_holds},
          {"sandwich_holds", r.sandwich_holds},
          {"pass", r.pass()},
          {"witness", r.witness},
          {"calibration", runs(r.calibration)},
          {"battery", runs(r.battery)}};
}

std::vector<double> superlinearity_ratio(const SpectrumTable& table, const std::vector<ModeKey>& keys,
                                         const std::vector<double>& norms, int samples, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  for (const auto& k : keys) idx.push_back(table.index_of(k));
  const Eigen::MatrixXd G = gradient_y_gram(table, idx);
  const Eigen::Index n = Eigen::Index(keys.size());
  Eigen::VectorXd lam(n), m2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lam(i) = table.modes[idx[std::size_t(i)]].lambda;
    m2(i) = double(keys[std::size_t(i)].m) * keys[std::size_t(i)].m;
  }
  std::vector<double> out;
  for (std::size_t level = 0; level < norms.size(); ++level) {
    std::mt19937_64 rng(subtask_seed(seed, level));
    std::normal_distribution<double> N01;
    double worst = 0;
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXd z(n);
      for (Eigen::Index i = 0; i < n; ++i) z(i) = N01(rng);
      const Eigen::VectorXd h = (norms[level] / z.norm()) * z.cwiseQuotient(lam.cwiseSqrt());
      const double ux2 = h.dot(m2.cwiseProduct(h));
      const double h1 = h.squaredNorm() + ux2 + h.dot(G * h);
      const double a = h.dot(lam.cwiseProduct(h));
      worst = std::max(worst, h1 / (a + ux2 * ux2));
    }
    out.push_back(worst);
  }
  return out;
}

}  // namespace platelab
