#pragma once

// Adaptive Dormand-Prince 5(4) driver with dense output.
//
// odeint provides the stepper and the continuous-output interpolant; the
// acceptance loop lives here so that every accepted step can be observed
// (for running quadratures and sampling) and so that a step-size underflow
// reports the last valid state.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "platelab/errors.hpp"

namespace platelab::ode {

using State = std::vector<double>;

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_dt = 0.0;  // 0: automatic
  double max_dt = 0.0;      // 0: unlimited
  std::size_t max_steps = 200'000'000;
};

struct Summary {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  // Sum over accepted steps of the embedded local error estimate (max norm).
  double error_estimate = 0.0;
  double t_end = 0.0;
  bool stopped_early = false;
};

using Stepper = boost::numeric::odeint::runge_kutta_dopri5<State>;

// View of one accepted step; evaluate() interpolates inside [t0, t1].
class StepView {
public:
  StepView(const Stepper& st, double t0, double t1, const State& y0, const State& y1,
           const State& f0, const State& f1)
      : st_(st), t0(t0), t1(t1), y0(y0), y1(y1), f0(f0), f1(f1) {}

  void evaluate(double t, State& out) const {
    if (t == t1) {
      out = y1;
      return;
    }
    if (t == t0) {
      out = y0;
      return;
    }
    out.resize(y0.size());
    st_.calc_state(t, out, y0, f0, t0, y1, f1, t1);
  }

private:
  const Stepper& st_;

public:
  const double t0, t1;
  const State &y0, &y1, &f0, &f1;
};

namespace detail {

inline double err_norm(const State& y0, const State& y1, const State& e, const Options& o) {
  double m = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double sc = o.abs_tol + o.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = std::abs(e[i]) / sc;
    if (!std::isfinite(r) || !std::isfinite(y1[i])) return std::numeric_limits<double>::infinity();
    m = std::max(m, r);
  }
  return m;
}

inline double max_abs(const State& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

// Integrates y' = sys(y, t) from t0 to t1 in place. on_step(const StepView&)
// is called after each accepted step and returns false to stop early.
template <class System, class OnStep>
Summary integrate_adaptive(System&& sys, State& y, double t0, double t1, const Options& opt,
                           OnStep&& on_step) {
  if (!(t1 > t0)) throw InvalidParameter("span", "t1 must exceed t0");
  if (!(opt.abs_tol > 0) || !(opt.rel_tol > 0))
    throw InvalidParameter("tolerance", "abs and rel tolerances must be > 0");

  auto rhs = [&sys](const State& x, State& dx, double t) { sys(x, dx, t); };
  Stepper stepper;
  const std::size_t n = y.size();
  State f0(n), y1(n), f1(n), err(n);
  rhs(y, f0, t0);

  double dt = opt.initial_dt;
  if (dt <= 0) {
    // Hairer-Wanner starting step from the size of y and y'.
    const double d0 = detail::max_abs(y), d1 = detail::max_abs(f0);
    const double sc = opt.abs_tol + opt.rel_tol * d0;
    double h0 = (d0 / sc < 1e-5 || d1 / sc < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    State y_try(n), f_try(n);
    for (std::size_t i = 0; i < n; ++i) y_try[i] = y[i] + h0 * f0[i];
    rhs(y_try, f_try, t0 + h0);
    double d2 = 0;
    for (std::size_t i = 0; i < n; ++i) d2 = std::max(d2, std::abs(f_try[i] - f0[i]));
    d2 /= sc * h0;
    const double h1 = std::max(d1 / sc, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                     : std::pow(0.01 / std::max(d1 / sc, d2), 0.2);
    dt = std::min(100 * h0, h1);
  }
  if (opt.max_dt > 0) dt = std::min(dt, opt.max_dt);

  Summary s;
  double t = t0;
  while (t < t1) {
    if (s.accepted + s.rejected >= opt.max_steps) {
      std::ostringstream os;
      os << "step budget exhausted at t=" << t;
      throw IntegrationError(os.str(), t, y);
    }
    bool last = false;
    if (t + dt >= t1 || t1 - (t + dt) < 1e-12 * std::max(1.0, std::abs(t1))) {
      dt = t1 - t;
      last = true;
    }
    if (dt < 1e-14 * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size underflow (dt=" << dt << ") at t=" << t;
      throw IntegrationError(os.str(), t, y);
    }
    stepper.do_step(rhs, y, f0, t, y1, f1, dt, err);
    const double e = detail::err_norm(y, y1, err, opt);
    if (e <= 1.0) {
      const double tn = last ? t1 : t + dt;
      ++s.accepted;
      s.error_estimate += detail::max_abs(err);
      const StepView view(stepper, t, tn, y, y1, f0, f1);
      const bool go_on = on_step(view);
      t = tn;
      y.swap(y1);
      f0.swap(f1);
      const double fac = e == 0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      dt *= fac;
      if (opt.max_dt > 0) dt = std::min(dt, opt.max_dt);
      if (!go_on) {
        s.stopped_early = t < t1;
        break;
      }
    } else {
      ++s.rejected;
      const double fac = std::isfinite(e) ? std::clamp(0.9 * std::pow(e, -0.2), 0.1, 0.9) : 0.1;
      dt *= fac;
    }
  }
  s.t_end = t;
  return s;
}

// Emits samples on the grid t0 + i*stride (plus the final time) as steps are accepted.
class GridSampler {
public:
  GridSampler(double t0, double t1, double stride) : t0_(t0), t1_(t1), stride_(stride) {
    if (!(stride > 0)) throw InvalidParameter("stride", "must be > 0");
  }

  // Calls emit(t, state) for grid times in (view.t0, view.t1]; the initial
  // sample at t0 is the caller's responsibility.
  template <class Emit>
  void consume(const StepView& view, Emit&& emit) {
    State buf;
    for (;;) {
      double tg = t0_ + static_cast<double>(next_) * stride_;
      if (tg > t1_ || t1_ - tg < 1e-12 * stride_) tg = t1_;
      if (tg > view.t1 || tg <= last_) break;
      view.evaluate(tg, buf);
      emit(tg, buf);
      last_ = tg;
      if (tg == t1_) break;
      ++next_;
    }
  }

private:
  double t0_, t1_, stride_;
  std::size_t next_ = 1;
  double last_ = -std::numeric_limits<double>::infinity();
};

}  // namespace platelab::ode
