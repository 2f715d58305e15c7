#include "platelab/modal.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "platelab/errors.hpp"

namespace platelab {

TruncationSpec TruncationSpec::first_n(const SpectrumTable& table, std::size_t n) {
  if (n == 0 || n > table.size())
    throw InvalidParameter("truncation", fmt::format("cannot take {} of {} modes", n, table.size()));
  TruncationSpec s;
  for (std::size_t i = 0; i < n; ++i) s.keys.push_back(table.modes[i].key);
  return s;
}

TruncationSpec TruncationSpec::same_m(const SpectrumTable& table, int m, double max_lambda) {
  TruncationSpec s;
  for (const EigenMode& w : table.modes)
    if (w.key.m == m && w.lambda <= max_lambda) s.keys.push_back(w.key);
  if (s.keys.empty()) throw InvalidParameter("truncation", fmt::format("no modes with m={}", m));
  return s;
}

void TruncationSpec::validate(const SpectrumTable& table) const {
  if (keys.empty()) throw InvalidParameter("truncation.keys", "must be nonempty");
  for (const ModeKey& k : keys) table.index_of(k);
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (std::size_t j = i + 1; j < keys.size(); ++j)
      if (keys[i] == keys[j]) throw InvalidParameter("truncation.keys", "duplicate key " + to_string(keys[i]));
  if (!(abs_tol > 0)) throw InvalidParameter("truncation.abs_tol", "must be > 0");
  if (!(rel_tol > 0)) throw InvalidParameter("truncation.rel_tol", "must be > 0");
  if (!(stride > 0)) throw InvalidParameter("truncation.stride", "must be > 0");
}

ModalSystem::ModalSystem(const PlateParams& params, const SpectrumTable& table,
                         const std::vector<ModeKey>& keys)
    : params_(params), keys_(keys) {
  params.validate();
  if (keys.empty()) throw InvalidParameter("truncation.keys", "must be nonempty");
  const std::size_t n = keys.size();
  lambda_.resize(n);
  m2_.resize(n);
  g_.resize(n);
  ups_.resize(n, n);
  const Eigen::VectorXd gfull = project_forcing(params.forcing, table);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ti = table.index_of(keys[i]);
    index_.push_back(ti);
    lambda_[i] = table.modes[ti].lambda;
    m2_[i] = double(keys[i].m) * keys[i].m;
    g_[i] = gfull[ti];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ups_(i, j) = table.upsilon(index_[i], index_[j]);
}

Eigen::VectorXd ModalSystem::acceleration(const Eigen::VectorXd& h, const Eigen::VectorXd& hdot) const {
  const PlateParams& p = params_;
  const double ux2 = (m2_.array() * h.array().square()).sum();
  Eigen::VectorXd a = -p.k * hdot - lambda_.cwiseProduct(h) -
                      (p.S * ux2 - p.P) * m2_.cwiseProduct(h) + g_;
  if (p.alpha != 0.0) a.noalias() += p.alpha * (ups_.transpose() * h);
  return a;
}

void ModalSystem::rhs(const ode::State& y, ode::State& dy) const {
  const Eigen::Index n = static_cast<Eigen::Index>(size());
  Eigen::Map<const Eigen::VectorXd> h(y.data(), n), hd(y.data() + n, n);
  Eigen::Map<Eigen::VectorXd> dh(dy.data(), n), dhd(dy.data() + n, n);
  dh = hd;
  dhd = acceleration(h, hd);
}

double ModalSystem::coupling(const Eigen::VectorXd& h, const Eigen::VectorXd& v) const {
  return h.dot(ups_ * v);
}

EnergyReport ModalSystem::energy(const Eigen::VectorXd& h, const Eigen::VectorXd& hdot, double nu) const {
  const PlateParams& p = params_;
  EnergyReport r;
  r.norm_u_H2star_sq = (lambda_.array() * h.array().square()).sum();
  r.norm_ux_sq = (m2_.array() * h.array().square()).sum();
  r.norm_ut_sq = hdot.squaredNorm();
  r.norm_u_sq = h.squaredNorm();
  const double ut_u = hdot.dot(h);
  const double quartic = 0.25 * p.S * r.norm_ux_sq * r.norm_ux_sq;
  r.E = 0.5 * (r.norm_u_H2star_sq + r.norm_ut_sq);
  r.E_plus = r.E + quartic;
  r.script_E = r.E_plus - 0.5 * p.P * r.norm_ux_sq - g_.dot(h);
  r.V_nu = r.E_plus - 0.5 * p.P * r.norm_ux_sq + nu * ut_u;
  r.V_nu_k = r.script_E + nu * (ut_u + 0.5 * p.k * r.norm_u_sq);
  return r;
}

ModalState rhs(const ModalState& state, const PlateParams& params, const SpectrumTable& table,
               const std::vector<ModeKey>& keys) {
  ModalSystem sys(params, table, keys);
  if (static_cast<std::size_t>(state.h.size()) != sys.size() ||
      static_cast<std::size_t>(state.hdot.size()) != sys.size())
    throw InvalidParameter("state", "dimension does not match the truncation");
  ModalState d;
  d.t = state.t;
  d.h = state.hdot;
  d.hdot = sys.acceleration(state.h, state.hdot);
  return d;
}

namespace {

ModalState to_state(double t, const ode::State& y, std::size_t n) {
  ModalState s;
  s.t = t;
  s.h = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  s.hdot = Eigen::Map<const Eigen::VectorXd>(y.data() + n, n);
  return s;
}

}  // namespace

Trajectory integrate(const ModalState& init, double t0, double t1, const TruncationSpec& spec,
                     const PlateParams& params, const SpectrumTable& table, const IntegrateOptions& opt) {
  spec.validate(table);
  const ModalSystem sys(params, table, spec.keys);
  const std::size_t n = sys.size();
  if (static_cast<std::size_t>(init.h.size()) != n || static_cast<std::size_t>(init.hdot.size()) != n)
    throw InvalidParameter("initial state", fmt::format("expected {} modal coefficients", n));

  Trajectory tr;
  tr.meta.params = params;
  tr.meta.truncation = spec;
  tr.meta.seed = opt.seed;
  tr.meta.nu = opt.nu;

  ode::State y(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = init.h[i];
    y[n + i] = init.hdot[i];
  }
  ModalState s0 = to_state(t0, y, n);
  tr.energies.push_back(sys.energy(s0.h, s0.hdot, opt.nu));
  tr.samples.push_back(std::move(s0));
  tr.dissipation.push_back(0.0);
  tr.work.push_back(0.0);

  double D = 0, W = 0;
  // integrands |u_t|^2 and (u_y, u_t) at a state
  auto integrands = [&](const ode::State& s, double& d, double& w) {
    Eigen::Map<const Eigen::VectorXd> h(s.data(), n), hd(s.data() + n, n);
    d = hd.squaredNorm();
    w = h.dot(sys.upsilon() * hd);
  };
  ode::State buf;
  // Composite Simpson with four panels on [a, b] using the dense output.
  auto accumulate = [&](const ode::StepView& v, double a, const ode::State& ya, double b,
                        const ode::State& yb) {
    if (b <= a) return;
    const double h = (b - a) / 4;
    double d, w, sd = 0, sw = 0;
    integrands(ya, d, w);
    sd += d;
    sw += w;
    integrands(yb, d, w);
    sd += d;
    sw += w;
    for (int i = 1; i < 4; ++i) {
      v.evaluate(a + i * h, buf);
      integrands(buf, d, w);
      const double c = (i % 2 == 1) ? 4.0 : 2.0;
      sd += c * d;
      sw += c * w;
    }
    D += sd * h / 3;
    W += sw * h / 3;
  };

  ode::GridSampler sampler(t0, t1, spec.stride);
  ode::Options o;
  o.abs_tol = spec.abs_tol;
  o.rel_tol = spec.rel_tol;
  o.max_dt = opt.max_dt;
  auto system = [&sys](const ode::State& x, ode::State& dx, double) { sys.rhs(x, dx); };

  try {
    tr.meta.summary = ode::integrate_adaptive(system, y, t0, t1, o, [&](const ode::StepView& v) {
      double a = v.t0;
      ode::State ya = v.y0;
      bool go_on = true;
      sampler.consume(v, [&](double ts, const ode::State& ys) {
        accumulate(v, a, ya, ts, ys);
        a = ts;
        ya = ys;
        ModalState s = to_state(ts, ys, n);
        tr.energies.push_back(sys.energy(s.h, s.hdot, opt.nu));
        tr.dissipation.push_back(D);
        tr.work.push_back(W);
        if (opt.keep_going && !opt.keep_going(s)) go_on = false;
        tr.samples.push_back(std::move(s));
      });
      accumulate(v, a, ya, v.t1, v.y1);
      return go_on;
    });
  } catch (const IntegrationError& e) {
    throw IntegrationError(std::string(e.what()) + " (modal system, " + std::to_string(n) + " modes)",
                           e.t(), e.last_state());
  }
  return tr;
}

IdentityResidual energy_identity_residual(const Trajectory& traj, const PlateParams& params) {
  IdentityResidual r;
  if (traj.samples.empty()) return r;
  const double E0 = traj.energies.front().script_E;
  double lo = 0, hi = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double Ei = traj.energies[i].script_E;
    const double v = Ei - E0 + params.k * traj.dissipation[i] - params.alpha * traj.work[i];
    r.series.push_back(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    r.max_script_E = std::max(r.max_script_E, std::abs(Ei));
  }
  r.max_abs = hi - lo;
  return r;
}

std::string trajectory_csv(const Trajectory& traj) {
  const auto& keys = traj.meta.truncation.keys;
  auto tag = [](const ModeKey& k) {
    return fmt::format("m{}{}{}", k.m, k.parity == Parity::even ? 'e' : 'o', k.branch);
  };
  std::string s = "t";
  for (const auto& k : keys) s += ",h_" + tag(k);
  for (const auto& k : keys) s += ",hdot_" + tag(k);
  s += ",E,E_plus,script_E,V_nu,V_nu_k\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const ModalState& st = traj.samples[i];
    s += fmt::format("{:.17g}", st.t);
    for (Eigen::Index j = 0; j < st.h.size(); ++j) s += fmt::format(",{:.17g}", st.h[j]);
    for (Eigen::Index j = 0; j < st.hdot.size(); ++j) s += fmt::format(",{:.17g}", st.hdot[j]);
    const EnergyReport& e = traj.energies[i];
    s += fmt::format(",{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", e.E, e.E_plus, e.script_E, e.V_nu, e.V_nu_k);
  }
  return s;
}

double y_distance(const ModalSystem& sys, const ModalState& s, const Eigen::VectorXd& e) {
  const Eigen::VectorXd d = s.h - e;
  return std::sqrt((sys.lambda().array() * d.array().square()).sum() + s.hdot.squaredNorm());
}

}  // namespace platelab
