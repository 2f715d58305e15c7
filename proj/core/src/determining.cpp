#include "platelab/determining.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "platelab/errors.hpp"
#include "platelab/parallel.hpp"
#include "platelab/stability.hpp"

namespace platelab {

DefectReport modal_defect(int N, const SpectrumTable& table, double s) {
  if (N < 1) throw InvalidParameter("N", "must be >= 1");
  if (!(s >= 0 && s < 2)) throw InvalidParameter("s", "must lie in [0, 2)");
  if (std::size_t(N) + 1 > table.trusted_count())
    throw InvalidParameter("table", fmt::format("need at least {} trusted modes (have {}); raise m_max or per_m",
                                                N + 1, table.trusted_count()));
  DefectReport r;
  r.N = N;
  r.s = s;
  r.lambda_next = table.modes[std::size_t(N)].lambda;
  r.eps_L0 = 1.0 / std::sqrt(r.lambda_next);
  r.eps_L_s = std::pow(r.eps_L0, (2.0 - s) / 2.0);
  return r;
}

double spectral_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda, double s) {
  return std::sqrt((lambda.array().pow(s / 2.0) * v.array().square()).sum());
}

double calibrate_lemma84_constant(const Eigen::VectorXd& lambda, int N, double eta, int samples, std::uint64_t seed) {
  if (N < 1 || N > lambda.size()) throw InvalidParameter("N", "out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::bernoulli_distribution coin;
  double C = 0;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(lambda.size());
  for (int k = 0; k < samples; ++k) {
    // alternate cube vertices and interior points of the resolved span
    for (int j = 0; j < N; ++j) v(j) = (k % 2 == 0) ? (coin(rng) ? 1.0 : -1.0) : U(rng);
    const double mx = v.head(N).cwiseAbs().maxCoeff();
    if (mx > 0) C = std::max(C, spectral_norm(v, lambda, 2.0 - eta) / mx);
  }
  return C;
}

double lemma_8_4_margin(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda, int N, double eta, double C) {
  if (N < 1 || N >= lambda.size()) throw InvalidParameter("N", "need 1 <= N < dimension");
  const double eps = std::pow(1.0 / std::sqrt(lambda(N)), eta / 2.0);
  return eps * spectral_norm(v, lambda, 2.0) + C * v.head(N).cwiseAbs().maxCoeff() - spectral_norm(v, lambda, 2.0 - eta);
}

DeterminingReport determining_experiment(const PlateParams& params, const SpectrumTable& table,
                                         const TruncationSpec& trunc, const std::vector<int>& ladder,
                                         const PairSpec& ps, double t_final) {
  trunc.validate(table);
  if (ps.n_pairs < 1) throw InvalidParameter("pairs.n_pairs", "must be >= 1");
  const ModalSystem sys(params, table, trunc.keys);
  const std::size_t n = sys.size();
  DeterminingReport r;
  r.ladder = ladder;
  for (int N : ladder)
    if (N < 1 || std::size_t(N) > n) throw InvalidParameter("ladder", fmt::format("N={} outside 1..{}", N, n));

  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) { return sys.lambda()(a) < sys.lambda()(b); });
  for (auto i : perm) r.order.push_back(sys.keys()[std::size_t(i)]);

  std::vector<Trajectory> first(std::size_t(ps.n_pairs)), second(std::size_t(ps.n_pairs));
  parallel_for(std::size_t(2 * ps.n_pairs), ps.threads, [&](std::size_t task) {
    const std::size_t pair = task / 2, member = task % 2;
    const std::uint64_t s = subtask_seed(ps.seed, ps.identical ? 2 * pair : task);
    ModalState s0 = random_state(sys, ps.norm, s);
    if (int(pair) < ps.restricted_pairs) {
      for (std::size_t j = 0; j < n; ++j) {
        const int m = sys.keys()[j].m;
        if (std::find(ps.restrict_m.begin(), ps.restrict_m.end(), m) == ps.restrict_m.end())
          s0.h(Eigen::Index(j)) = s0.hdot(Eigen::Index(j)) = 0.0;
      }
      const double nrm = y_distance(sys, s0, Eigen::VectorXd::Zero(Eigen::Index(n)));
      if (nrm > 0) {
        s0.h *= ps.norm / nrm;
        s0.hdot *= ps.norm / nrm;
      }
    }
    (member == 0 ? first : second)[pair] = integrate(s0, 0.0, t_final, trunc, params, table);
  });

  r.consistent.assign(ladder.size(), true);
  for (int p = 0; p < ps.n_pairs; ++p) {
    const Trajectory &a = first[std::size_t(p)], &b = second[std::size_t(p)];
    const std::size_t m = std::min(a.size(), b.size());
    PairOutcome o;
    std::vector<double> ys(m);
    std::vector<std::vector<double>> ls(ladder.size(), std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
      ModalState z;
      z.h = a.samples[i].h - b.samples[i].h;
      z.hdot = a.samples[i].hdot - b.samples[i].hdot;
      ys[i] = y_distance(sys, z, Eigen::VectorXd::Zero(Eigen::Index(n)));
      for (std::size_t L = 0; L < ladder.size(); ++L) {
        double mx = 0;
        for (int j = 0; j < ladder[L]; ++j) mx = std::max(mx, std::abs(z.h(perm[std::size_t(j)])));
        ls[L][i] = mx;
      }
    }
    o.z0 = ys.front();
    const std::size_t tail = m - std::max<std::size_t>(1, m / 4);
    auto tail_max = [&](const std::vector<double>& v) { return *std::max_element(v.begin() + long(tail), v.end()); };
    o.final_state = tail_max(ys);
    const double thr = ps.decay_tol * o.z0;
    o.state_decays = o.final_state <= thr;
    for (std::size_t L = 0; L < ladder.size(); ++L) {
      const bool md = tail_max(ls[L]) <= thr;
      o.modal_decays.push_back(md);
      o.consistent.push_back(!md || o.state_decays);
      if (!o.consistent.back()) r.consistent[L] = false;
    }
    if (p == 0) {
      for (std::size_t i = 0; i < m; ++i) r.t.push_back(a.samples[i].t);
      r.modal_series = ls;
      r.state_series = ys;
    }
    r.pairs.push_back(std::move(o));
  }
  // ladder assumed ascending in N
  for (std::size_t L = ladder.size(); L-- > 0;) {
    if (!r.consistent[L]) break;
    r.n_star = ladder[L];
  }
  return r;
}

nlohmann::json determining_json(const DeterminingReport& r) {
  nlohmann::json j;
  j["ladder"] = r.ladder;
  std::vector<std::string> order;
  for (const auto& k : r.order) order.push_back(to_string(k));
  j["mode_order"] = order;
  std::vector<bool> cons(r.consistent.begin(), r.consistent.end());
  j["consistent"] = cons;
  j["n_star"] = r.n_star;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    std::vector<bool> md(p.modal_decays.begin(), p.modal_decays.end());
    std::vector<bool> c(p.consistent.begin(), p.consistent.end());
    j["pairs"].push_back({{"z0", p.z0},
                          {"state_decays", p.state_decays},
                          {"final_state", p.final_state},
                          {"modal_decays", md},
                          {"consistent", c}});
  }
  return j;
}

std::string determining_series_csv(const DeterminingReport& r) {
  std::string s = "t,state";
  for (int N : r.ladder) s += fmt::format(",modal_N{}", N);
  s += "\n";
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    s += fmt::format("{:.17g},{:.17g}", r.t[i], r.state_series[i]);
    for (const auto& series : r.modal_series) s += fmt::format(",{:.17g}", series[i]);
    s += "\n";
  }
  return s;
}

}  // namespace platelab
