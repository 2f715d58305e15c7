#include "platelab/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "platelab/errors.hpp"
#include "platelab/parallel.hpp"

namespace platelab {

Eigen::VectorXd stationary_map(const ModalSystem& sys, const Eigen::VectorXd& h) {
  return -sys.acceleration(h, Eigen::VectorXd::Zero(h.size()));
}

Eigen::MatrixXd linearization(const ModalSystem& sys, const Eigen::VectorXd& e) {
  const PlateParams& p = sys.params();
  const Eigen::VectorXd m2e = sys.m2().cwiseProduct(e);
  const double ux2 = e.dot(m2e);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(e.size(), e.size());
  J.diagonal() = sys.lambda() + (p.S * ux2 - p.P) * sys.m2();
  J.noalias() += 2.0 * p.S * m2e * m2e.transpose();
  J.noalias() -= p.alpha * sys.upsilon().transpose();
  return J;
}

Eigen::MatrixXd fd_jacobian(const ModalSystem& sys, const Eigen::VectorXd& h) {
  const Eigen::Index n = h.size();
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd x = h;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = 1e-6 * std::max(1.0, std::abs(h(j)));
    x(j) = h(j) + d;
    const Eigen::VectorXd fp = stationary_map(sys, x);
    x(j) = h(j) - d;
    const Eigen::VectorXd fm = stationary_map(sys, x);
    x(j) = h(j);
    J.col(j) = (fp - fm) / (2.0 * d);
  }
  return J;
}

namespace {

double scaled_residual(const ModalSystem& sys, const Eigen::VectorXd& h, const Eigen::VectorXd& F) {
  return F.norm() / (1.0 + sys.lambda().cwiseProduct(h).norm() + sys.g().norm());
}

}  // namespace

bool newton_solve(const ModalSystem& sys, Eigen::VectorXd& h, const NewtonOptions& opt, int* iterations) {
  Eigen::VectorXd F = stationary_map(sys, h);
  double r = scaled_residual(sys, h, F);
  for (int it = 0; it < opt.max_iter; ++it) {
    if (iterations) *iterations = it;
    if (r <= opt.tol) return true;
    const Eigen::MatrixXd J = fd_jacobian(sys, h);
    const Eigen::VectorXd step = J.fullPivLu().solve(-F);
    if (!step.allFinite()) return false;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Eigen::VectorXd hn = h + t * step;
      const Eigen::VectorXd Fn = stationary_map(sys, hn);
      if (Fn.norm() < (1.0 - 1e-4 * t) * F.norm()) {
        h = hn;
        F = Fn;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // stagnation near round-off: accept if close enough
      r = scaled_residual(sys, h, F);
      return r <= 100.0 * opt.tol;
    }
    r = scaled_residual(sys, h, F);
  }
  if (iterations) *iterations = opt.max_iter;
  return r <= opt.tol;
}

NewtonEquilibrium classify_equilibrium(const ModalSystem& sys, const Eigen::VectorXd& h, const NewtonOptions& opt) {
  NewtonEquilibrium e;
  e.h = h;
  e.residual = scaled_residual(sys, h, stationary_map(sys, h));
  const Eigen::MatrixXd J = linearization(sys, h);
  Eigen::EigenSolver<Eigen::MatrixXd> es(J, false);
  e.spectrum = es.eigenvalues();
  std::sort(e.spectrum.data(), e.spectrum.data() + e.spectrum.size(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const double norm = svd.singularValues()(0);
  e.hyperbolic = std::abs(e.spectrum(0)) > opt.hyperbolic_margin * norm;
  return e;
}

double trivial_uniqueness_threshold(const PlateParams& params, double lambda1) {
  if (!(params.P >= 0)) throw InvalidParameter("P", "must be >= 0");
  if (!(params.P < lambda1)) throw InvalidParameter("P", "must be < lambda1 (weakly prestressed)");
  return (lambda1 - params.P) * std::sqrt(2.0 * (1.0 - params.sigma * params.sigma)) / std::sqrt(lambda1);
}

double apriori_bound(const PlateParams& params, double lambda1, double g_norm) {
  const double c = std::sqrt(2.0 * (1.0 - params.sigma * params.sigma));
  const double den = (lambda1 - params.P) * c - std::abs(params.alpha) * std::sqrt(lambda1);
  if (!(den > 0)) return std::numeric_limits<double>::infinity();
  return c * g_norm / den;
}

double newton_start_radius(const ModalSystem& sys, double lambda1) {
  const PlateParams& p = sys.params();
  const double gn = sys.g().norm();
  if (gn > 0) {
    const double R = apriori_bound(p, lambda1, gn);
    if (std::isfinite(R)) return 1.5 * R;
  }
  // Galerkin unimodal states: within one m-block, (diag(lambda) - alpha Ups^T) h = -m^2 mu h
  double best = 0;
  std::vector<int> ms;
  for (const ModeKey& k : sys.keys())
    if (std::find(ms.begin(), ms.end(), k.m) == ms.end()) ms.push_back(k.m);
  for (int m : ms) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < sys.size(); ++i)
      if (sys.keys()[i].m == m) idx.push_back(Eigen::Index(i));
    const Eigen::Index n = Eigen::Index(idx.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        K(a, b) = (a == b ? sys.lambda()(idx[a]) : 0.0) - p.alpha * sys.upsilon()(idx[b], idx[a]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(K);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto ev = es.eigenvalues()(j);
      if (std::abs(ev.imag()) > 1e-12 * std::abs(ev)) continue;
      const double mu = -ev.real() / (double(m) * m);
      if (!(mu + p.P > 0) || !(p.S > 0)) continue;
      Eigen::VectorXd v = es.eigenvectors().col(j).real();
      v *= std::sqrt((mu + p.P) / p.S) / (m * v.norm());
      double h2 = 0;
      for (Eigen::Index a = 0; a < n; ++a) h2 += sys.lambda()(idx[a]) * v(a) * v(a);
      best = std::max(best, std::sqrt(h2));
    }
  }
  return best > 0 ? 1.5 * best : std::sqrt(lambda1);
}

NewtonReport newton_equilibria(const PlateParams& params, const SpectrumTable& table, const TruncationSpec& trunc,
                               const NewtonOptions& opt) {
  if (opt.n_starts < 1) throw InvalidParameter("n_starts", "must be >= 1");
  trunc.validate(table);
  const ModalSystem sys(params, table, trunc.keys);
  NewtonReport rep;
  rep.radius = opt.radius > 0 ? opt.radius : newton_start_radius(sys, table.lambda1);
  const Eigen::Index n = Eigen::Index(sys.size());

  std::vector<Eigen::VectorXd> found(std::size_t(opt.n_starts));
  std::vector<char> ok(std::size_t(opt.n_starts), 0);
  std::vector<int> iters(std::size_t(opt.n_starts), 0);
  parallel_for(std::size_t(opt.n_starts), opt.threads, [&](std::size_t s) {
    std::mt19937_64 rng(subtask_seed(opt.seed, s));
    std::normal_distribution<double> N01;
    std::uniform_real_distribution<double> U01;
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = N01(rng);
    x *= std::pow(U01(rng), 1.0 / double(n)) / x.norm();
    Eigen::VectorXd h = rep.radius * x.cwiseQuotient(sys.lambda().cwiseSqrt());
    int it = 0;
    if (newton_solve(sys, h, opt, &it) && h.allFinite()) {
      found[s] = h;
      ok[s] = 1;
      iters[s] = it;
    }
  });

  for (int s = 0; s < opt.n_starts; ++s) {
    if (!ok[std::size_t(s)]) {
      ++rep.discarded;
      continue;
    }
    ++rep.converged;
    const Eigen::VectorXd& h = found[std::size_t(s)];
    bool dup = false;
    for (auto& e : rep.equilibria) {
      if ((e.h - h).norm() <= opt.dedup * std::max(1.0, h.norm())) {
        ++e.hits;
        dup = true;
        break;
      }
    }
    if (!dup) {
      NewtonEquilibrium e = classify_equilibrium(sys, h, opt);
      e.iterations = iters[std::size_t(s)];
      rep.equilibria.push_back(std::move(e));
    }
  }
  auto h2 = [&](const Eigen::VectorXd& h) { return h.dot(sys.lambda().cwiseProduct(h)); };
  std::stable_sort(rep.equilibria.begin(), rep.equilibria.end(),
                   [&](const NewtonEquilibrium& a, const NewtonEquilibrium& b) { return h2(a.h) < h2(b.h); });
  return rep;
}

nlohmann::json equilibria_json(const NewtonReport& rep, const ModalSystem& sys) {
  nlohmann::json out;
  out["radius"] = rep.radius;
  out["converged"] = rep.converged;
  out["discarded"] = rep.discarded;
  std::vector<std::string> keys;
  for (const auto& k : sys.keys()) keys.push_back(to_string(k));
  out["keys"] = keys;
  out["equilibria"] = nlohmann::json::array();
  for (const auto& e : rep.equilibria) {
    nlohmann::json j;
    j["coefficients"] = std::vector<double>(e.h.data(), e.h.data() + e.h.size());
    j["residual"] = e.residual;
    j["hyperbolic"] = e.hyperbolic;
    j["hits"] = e.hits;
    nlohmann::json spec = nlohmann::json::array();
    for (Eigen::Index i = 0; i < e.spectrum.size(); ++i) spec.push_back({e.spectrum(i).real(), e.spectrum(i).imag()});
    j["linearization_spectrum"] = spec;
    out["equilibria"].push_back(j);
  }
  return out;
}

}  // namespace platelab
