#include "platelab/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "platelab/determining.hpp"
#include "platelab/duffing.hpp"
#include "platelab/equilibria.hpp"
#include "platelab/errors.hpp"
#include "platelab/io.hpp"
#include "platelab/parallel.hpp"
#include "platelab/stability.hpp"
#include "platelab/unimodal.hpp"

namespace platelab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Context {
  const ScenarioConfig& cfg;
  const json& ex;
  fs::path dir;
  SpectrumTable table;
  std::map<std::string, std::string> artifacts;

  void text(const std::string& name, const std::string& body) {
    io::write_text(dir / name, body);
    artifacts[name] = io::sha256_hex(body);
  }
  void jsonfile(const std::string& name, const json& j) {
    const std::string body = io::finite_or_null(j).dump(2) + "\n";
    text(name, body);
  }
  TruncationSpec trunc() const { return cfg.truncation(table); }
};

std::vector<int> ints(const json& v) { return v.get<std::vector<int>>(); }

UnimodalEquilibrium preset(const PlateParams& params, int m, double mu_hi) {
  return build_unimodal(m, params.alpha, params, MuWindow{0.0, mu_hi, 400});
}

json unimodal_json(const UnimodalEquilibrium& U, const SpectrumTable& table, const std::vector<ModeKey>& keys) {
  const Eigen::VectorXd c = unimodal_coefficients(U, table, keys);
  return {{"m", U.m},
          {"alpha", U.alpha},
          {"mu", U.mu},
          {"amplitude", U.amplitude},
          {"zero_count", U.zero_count},
          {"principal", U.principal},
          {"ode_residual", U.residual.ode},
          {"boundary_residual", U.residual.boundary},
          {"smallest_singular_value", U.singular_values[3]},
          {"projection_error", unimodal_projection_error(U, table, keys)},
          {"coefficients", std::vector<double>(c.data(), c.data() + c.size())}};
}

json cmd_spectrum(Context& c) {
  c.text("spectrum.csv", spectrum_csv(c.table));
  c.jsonfile("modes.json", modes_json(c.table));
  c.text("upsilon.csv", io::matrix_csv(c.table.upsilon));
  return {{"n_modes", c.table.size()}, {"trusted_modes", c.table.trusted_count()}, {"lambda1", c.table.lambda1}};
}

json cmd_simulate(Context& c) {
  const TruncationSpec tr = c.trunc();
  const ModalSystem sys(c.cfg.params, c.table, tr.keys);
  IntegrateOptions io_opt;
  io_opt.nu = c.ex["nu"];
  io_opt.seed = c.cfg.seed;
  const double t1 = c.ex["t_final"];
  if (!(t1 > 0)) throw InvalidParameter("experiment.t_final", "must be > 0");
  const Trajectory traj = integrate(initial_state(c.cfg, sys, c.table), 0.0, t1, tr, c.cfg.params, c.table, io_opt);
  c.text("trajectory.csv", trajectory_csv(traj));
  const IdentityResidual id = energy_identity_residual(traj, c.cfg.params);
  const EnergyReport& last = traj.energies.back();
  return {{"t_end", traj.samples.back().t},
          {"samples", traj.size()},
          {"accepted_steps", traj.meta.summary.accepted},
          {"rejected_steps", traj.meta.summary.rejected},
          {"final_E", last.E},
          {"final_V_nu", last.V_nu},
          {"identity_residual", id.max_abs},
          {"identity_relative", id.max_abs / std::max(1.0, id.max_script_E)}};
}

json cmd_stationary(Context& c) {
  const TruncationSpec tr = c.trunc();
  const ModalSystem sys(c.cfg.params, c.table, tr.keys);
  NewtonOptions opt;
  opt.n_starts = c.ex["n_starts"];
  opt.max_iter = c.ex["max_iter"];
  opt.tol = c.ex["tol"];
  opt.radius = c.ex["radius"];
  opt.seed = c.cfg.seed;
  opt.threads = c.cfg.threads;
  const NewtonReport rep = newton_equilibria(c.cfg.params, c.table, tr, opt);
  json eq = equilibria_json(rep, sys);
  c.jsonfile("equilibria.json", eq);
  int hyperbolic = 0;
  for (const auto& e : rep.equilibria) hyperbolic += e.hyperbolic;
  json summary = {{"n_equilibria", rep.equilibria.size()},
                  {"n_hyperbolic", hyperbolic},
                  {"converged", rep.converged},
                  {"discarded", rep.discarded},
                  {"radius", rep.radius}};
  const PlateParams& p = c.cfg.params;
  if (p.P >= 0 && p.P < c.table.lambda1) summary["trivial_uniqueness_threshold"] = trivial_uniqueness_threshold(p, c.table.lambda1);
  const auto ms = ints(c.ex["unimodal_m"]);
  if (!ms.empty()) {
    json uni = json::array();
    int found = 0;
    for (int m : ms) {
      try {
        uni.push_back(unimodal_json(preset(p, m, c.ex["mu_hi"]), c.table, tr.keys));
        ++found;
      } catch (const Error& e) {
        uni.push_back({{"m", m}, {"error", e.what()}});
      }
    }
    c.jsonfile("unimodal.json", uni);
    summary["n_unimodal"] = found;
  }
  return summary;
}

json cmd_branch(Context& c) {
  const auto ms = ints(c.ex["m"]);
  const double lo = c.ex["mu_lo"], hi = c.ex["mu_hi"];
  const int n_out = c.ex["n_out"];
  std::vector<BranchCurve> curves;
  json info = json::array();
  bool complete = true;
  double worst_violation = 0;
  for (int m : ms) {
    BranchCurve b = trace_branch(m, lo, hi, c.cfg.params, n_out);
    c.text(fmt::format("branch_m{}.csv", m), branch_csv({b}));
    complete = complete && b.complete;
    worst_violation = std::max(worst_violation, b.monotonicity_violation());
    double abar = std::nan("");
    try {
      abar = alpha_bar(m, c.cfg.params, MuWindow{0.0, hi, 400});
    } catch (const Error&) {
    }
    info.push_back({{"m", m},
                    {"complete", b.complete},
                    {"alpha_bar", abar},
                    {"monotonicity_violation", b.monotonicity_violation()},
                    {"diagnostics", b.diagnostics}});
    curves.push_back(std::move(b));
  }
  // Curves for increasing m must lie strictly below one another at every shared mu.
  bool ordered = true;
  for (std::size_t i = 0; i + 1 < curves.size(); ++i) {
    if (curves[i + 1].m <= curves[i].m) continue;
    const std::size_t n = std::min(curves[i].phi.size(), curves[i + 1].phi.size());
    for (std::size_t j = 0; j < n; ++j)
      if (!(curves[i + 1].phi[j] < curves[i].phi[j])) ordered = false;
  }
  c.text("branches.csv", branch_csv(curves));
  c.jsonfile("branches.json", info);
  return {{"n_curves", curves.size()}, {"complete", complete}, {"ordered", ordered}, {"max_monotonicity_violation", worst_violation}};
}

DuffingParams duffing_params(const Context& c, const UnimodalEquilibrium& U) {
  DuffingParams dp;
  dp.m = U.m;
  dp.k = c.cfg.params.k;
  dp.R2 = duffing_r2(U, c.cfg.params);
  return dp;
}

json cmd_duffing(Context& c) {
  const UnimodalEquilibrium U = preset(c.cfg.params, c.ex["m"], c.ex["mu_hi"]);
  const DuffingParams dp = duffing_params(c, U);
  const double phi0 = c.ex["phi0"], dphi0 = c.ex["dphi0"], t1 = c.ex["t_final"];
  DuffingOptions opt;
  opt.stop_when_decided = false;
  const DuffingTrajectory tr = integrate_duffing(dp, phi0, dphi0, t1, opt);
  c.text("duffing.csv", duffing_csv(tr));
  json summary = {{"m", dp.m},
                  {"mu", U.mu},
                  {"R2", dp.R2},
                  {"limit", to_string(tr.limit)},
                  {"predicate", nonzero_limit_predicate(phi0, dphi0, dp)},
                  {"dissipation_residual", tr.dissipation_residual},
                  {"energy_increase", tr.energy_increase}};
  const auto ns = ints(c.ex["heteroclinic_n"]);
  if (!ns.empty()) {
    const HeteroclinicReport h = heteroclinic_family(ns, dp, t1);
    c.jsonfile("heteroclinic.json", heteroclinic_json(h));
    summary["heteroclinic_all_plus"] = h.all_plus;
    summary["heteroclinic_all_negative_energy"] = h.all_negative_energy;
  }
  if (c.ex["cross_validate"].get<bool>()) {
    const CrossValidation cv =
        cross_validate_full(U, phi0, dphi0, c.cfg.params, c.table, c.trunc(), c.ex["cv_t_final"].get<double>());
    std::string csv = "t,discrepancy\n";
    for (std::size_t i = 0; i < cv.t.size(); ++i) csv += fmt::format("{:.17g},{:.17g}\n", cv.t[i], cv.discrepancy_series[i]);
    c.text("crossval.csv", csv);
    const double bound = 10 * (cv.projection_error + cv.tol);
    c.jsonfile("crossval.json", {{"projection_error", cv.projection_error},
                                 {"discrepancy", cv.discrepancy},
                                 {"leakage", cv.leakage},
                                 {"tol", cv.tol},
                                 {"bound", bound},
                                 {"duffing_limit", to_string(cv.duffing_limit)},
                                 {"galerkin_limit", to_string(cv.galerkin_limit)}});
    summary["cv_discrepancy"] = cv.discrepancy;
    summary["cv_bound"] = bound;
    summary["cv_pass"] = cv.discrepancy <= bound;
    summary["cv_limits_agree"] = cv.duffing_limit == cv.galerkin_limit;
  }
  return summary;
}

json cmd_basin(Context& c) {
  const UnimodalEquilibrium U = preset(c.cfg.params, c.ex["m"], c.ex["mu_hi"]);
  const DuffingParams dp = duffing_params(c, U);
  BasinSpec spec;
  spec.phi_lo = c.ex["phi_lo"];
  spec.phi_hi = c.ex["phi_hi"];
  spec.dphi_lo = c.ex["dphi_lo"];
  spec.dphi_hi = c.ex["dphi_hi"];
  spec.n_phi = c.ex["n_phi"];
  spec.n_dphi = c.ex["n_dphi"];
  spec.t_final = c.ex["t_final"];
  spec.threads = c.cfg.threads;
  const BasinMap b = basin_map(dp, spec);
  c.text("basin.csv", basin_csv(b));
  return {{"m", dp.m},
          {"R2", dp.R2},
          {"count_plus", b.count_plus},
          {"count_minus", b.count_minus},
          {"count_zero", b.count_zero},
          {"count_undecided", b.count_undecided},
          {"predicate_violations", b.predicate_violations},
          {"max_dissipation_residual", b.max_dissipation_residual},
          {"max_energy_increase", b.max_energy_increase}};
}

ThresholdQuery query_from(const Context& c) {
  ThresholdQuery q;
  q.nu = c.ex["nu"];
  q.delta = c.ex["delta"];
  if (q.nu == 0) q.nu = c.cfg.params.k / 4;
  if (q.delta == 0) q.delta = (c.cfg.params.k - q.nu) / 4;
  return q;
}

json cmd_thresholds(Context& c) {
  const ThresholdQuery q = query_from(c);
  const ThresholdReport r = thresholds(c.cfg.params, c.table.lambda1, q);
  const AsymptoticBounds b = asymptotic_bounds(c.cfg.params, c.table.lambda1, q.nu, r.vnu_limsup);
  json j = thresholds_json(r);
  j["nu"] = q.nu;
  j["delta"] = q.delta;
  j["asymptotic"] = {{"Psi", b.Psi}, {"ux_bound", b.ux_bound}, {"H2_bound", b.H2_bound}};
  c.jsonfile("thresholds.json", j);
  return {{"nu", q.nu},
          {"delta", q.delta},
          {"alpha_bound_general", r.alpha_bound_general},
          {"alpha_bound_g0_caseA", r.alpha_bound_g0_caseA},
          {"alpha_bound_g0_caseB", r.alpha_bound_g0_caseB},
          {"trivial_uniqueness_bound", r.trivial_uniqueness_bound},
          {"vnu_limsup", r.vnu_limsup},
          {"alpha_compliant", r.alpha_compliant}};
}

json cmd_absorb(Context& c) {
  AbsorbingOptions o;
  o.nu = c.ex["nu"];
  o.eta = c.ex["eta"];
  o.calibration_runs = c.ex["calibration_runs"];
  o.battery_runs = c.ex["battery_runs"];
  o.norm_lo = c.ex["norm_lo"];
  o.norm_hi = c.ex["norm_hi"];
  o.cal_norm_lo = c.ex["cal_norm_lo"];
  o.cal_norm_hi = c.ex["cal_norm_hi"];
  o.t_final = c.ex["t_final"];
  o.sup_starts = c.ex["sup_starts"];
  o.seed = c.cfg.seed;
  o.threads = c.cfg.threads;
  const AbsorbingBallReport r = absorbing_check(c.cfg.params, c.table, c.trunc(), o);
  c.jsonfile("absorbing.json", absorbing_json(r));
  double last_entry = 0;
  for (const auto& b : r.battery) last_entry = std::max(last_entry, b.entry_time_empirical);
  return {{"pass", r.pass()},
          {"C", r.C},
          {"C_trajectories", r.C_trajectories},
          {"eta", r.eta},
          {"level", r.level},
          {"level_empirical", r.level_empirical},
          {"last_entry_time", last_entry},
          {"witness", r.witness}};
}

json cmd_decay(Context& c) {
  const TruncationSpec tr = c.trunc();
  const ModalSystem sys(c.cfg.params, c.table, tr.keys);
  const int runs = c.ex["runs"];
  const double norm = c.ex["norm"], t1 = c.ex["t_final"];
  const bool polish = c.ex["target"] == "auto";
  if (runs < 0) throw InvalidParameter("experiment.runs", "must be >= 0");
  std::vector<Trajectory> trajs(static_cast<std::size_t>(runs));
  parallel_for(trajs.size(), c.cfg.threads, [&](std::size_t i) {
    trajs[i] = integrate(random_state(sys, norm, subtask_seed(c.cfg.seed, i)), 0.0, t1, tr, c.cfg.params, c.table);
  });
  std::string csv = "run,status,eta,residual,t_begin,t_end,target_norm\n";
  json out = json::array();
  double min_eta = std::numeric_limits<double>::infinity();
  int refused = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(Eigen::Index(sys.size()));
    bool target_ok = true;
    if (polish) {
      e = trajs[i].samples.back().h;
      target_ok = newton_solve(sys, e, NewtonOptions{});
      if (!target_ok) e.setZero();
    }
    DecayFit f = fit_decay(trajs[i], sys, e);
    if (!target_ok) {
      f.status = FitStatus::refused;
      f.reason = "Newton polish of the final state failed";
    }
    if (f.status == FitStatus::refused) ++refused;
    else if (f.status == FitStatus::fitted) min_eta = std::min(min_eta, f.eta);
    csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", i, to_string(f.status), f.eta, f.residual,
                       f.t_begin, f.t_end, e.norm());
    out.push_back({{"run", i},
                   {"status", to_string(f.status)},
                   {"eta", f.eta},
                   {"residual", f.residual},
                   {"t_begin", f.t_begin},
                   {"t_end", f.t_end},
                   {"n_used", f.n_used},
                   {"reason", f.reason},
                   {"target", std::vector<double>(e.data(), e.data() + e.size())}});
  }
  c.text("decay.csv", csv);
  c.jsonfile("decay.json", out);
  return {{"runs", runs}, {"refused", refused}, {"min_eta", runs - refused > 0 ? min_eta : std::nan("")}};
}

json cmd_determine(Context& c) {
  const int depth = c.ex["defect_depth"];
  std::string dcsv = "N,lambda_next,eps_L0,scaled\n";
  double worst = 0;
  int reached = 0;
  for (int N = 1; N <= depth && std::size_t(N) + 1 <= c.table.trusted_count(); ++N) {
    const DefectReport d = modal_defect(N, c.table, 0.0);
    const double scaled = d.eps_L0 * std::sqrt(d.lambda_next);
    worst = std::max(worst, std::abs(scaled - 1));
    dcsv += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", N, d.lambda_next, d.eps_L0, scaled);
    reached = N;
  }
  c.text("defect.csv", dcsv);
  PairSpec ps;
  ps.n_pairs = c.ex["n_pairs"];
  ps.norm = c.ex["norm"];
  ps.seed = c.cfg.seed;
  ps.identical = c.ex["identical"];
  ps.restricted_pairs = c.ex["restricted_pairs"];
  ps.restrict_m = ints(c.ex["restrict_m"]);
  ps.decay_tol = c.ex["decay_tol"];
  ps.threads = c.cfg.threads;
  const DeterminingReport r =
      determining_experiment(c.cfg.params, c.table, c.trunc(), ints(c.ex["ladder"]), ps, c.ex["t_final"].get<double>());
  c.jsonfile("determining.json", determining_json(r));
  c.text("determining_series.csv", determining_series_csv(r));
  return {{"n_star", r.n_star}, {"defect_depth", reached}, {"defect_max_deviation", worst}};
}

json run_command(Context& c);

json cmd_sweep(Context& c) {
  const std::string param = c.ex["parameter"];
  const auto values = c.ex["values"].get<std::vector<double>>();
  std::vector<json> results(values.size());
  std::vector<std::string> errors(values.size());
  parallel_for(values.size(), c.cfg.threads, [&](std::size_t i) {
    ScenarioConfig point = c.cfg;
    point.command = c.ex["inner"];
    point.experiment = c.ex["experiment"];
    point.threads = 1;
    const double v = values[i];
    if (param == "alpha") point.params.alpha = v;
    else if (param == "k") point.params.k = v;
    else if (param == "P") point.params.P = v;
    else if (param == "S") point.params.S = v;
    else if (param == "forcing.c") point.params.forcing.c = v;
    else if (param == "seed") point.seed = std::uint64_t(v);
    try {
      results[i] = run(point, c.dir / "points" / fmt::format("point_{:04d}", i)).summary;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  // single aggregator: union of scalar summary keys
  std::set<std::string> cols;
  for (const json& r : results)
    if (r.is_object())
      for (auto it = r.begin(); it != r.end(); ++it)
        if (it->is_primitive()) cols.insert(it.key());
  std::string csv = "index," + param + ",status";
  for (const auto& k : cols) csv += "," + k;
  csv += "\n";
  int failed = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv += fmt::format("{},{:.17g},{}", i, values[i], errors[i].empty() ? "ok" : "error");
    failed += !errors[i].empty();
    for (const auto& k : cols) {
      csv += ",";
      if (!results[i].is_object() || !results[i].contains(k)) continue;
      const json& v = results[i][k];
      if (v.is_number_float()) csv += fmt::format("{:.17g}", v.get<double>());
      else if (v.is_string()) csv += v.get<std::string>();
      else if (!v.is_null()) csv += v.dump();
    }
    csv += "\n";
  }
  c.text("sweep.csv", csv);
  json errs = json::object();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!errors[i].empty()) errs[fmt::format("{}", i)] = errors[i];
  c.jsonfile("sweep_errors.json", errs);
  return {{"points", values.size()}, {"failed", failed}};
}

json run_command(Context& c) {
  static const std::map<std::string, std::function<json(Context&)>> table = {
      {"spectrum", cmd_spectrum},   {"simulate", cmd_simulate}, {"stationary", cmd_stationary},
      {"branch", cmd_branch},       {"duffing", cmd_duffing},   {"basin", cmd_basin},
      {"thresholds", cmd_thresholds}, {"absorb", cmd_absorb},   {"decay", cmd_decay},
      {"determine", cmd_determine}, {"sweep", cmd_sweep}};
  auto it = table.find(c.cfg.command);
  if (it == table.end()) throw ConfigError("command", "unknown command '" + c.cfg.command + "'");
  return it->second(c);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ModalState initial_state(const ScenarioConfig& cfg, const ModalSystem& sys, const SpectrumTable& table) {
  const auto n = Eigen::Index(sys.size());
  ModalState s;
  s.h = Eigen::VectorXd::Zero(n);
  s.hdot = Eigen::VectorXd::Zero(n);
  const InitialData& d = cfg.initial;
  auto place = [&](const std::vector<std::pair<ModeKey, double>>& coeffs, Eigen::VectorXd& v, const char* field) {
    for (const auto& [key, val] : coeffs) {
      auto it = std::find(sys.keys().begin(), sys.keys().end(), key);
      if (it == sys.keys().end())
        throw ConfigError(std::string("config.initial.") + field, "mode " + mode_label(key) + " is not in the truncation");
      v(it - sys.keys().begin()) = val;
    }
  };
  switch (d.kind) {
    case InitialData::Kind::zero: break;
    case InitialData::Kind::modal:
      place(d.h, s.h, "h");
      place(d.hdot, s.hdot, "hdot");
      break;
    case InitialData::Kind::random: s = random_state(sys, d.norm, subtask_seed(cfg.seed, 1u << 20)); break;
    case InitialData::Kind::unimodal: {
      const Eigen::VectorXd c = unimodal_coefficients(preset(cfg.params, d.m, 100.0), table, sys.keys());
      s.h = d.phi0 * c;
      s.hdot = d.dphi0 * c;
      break;
    }
  }
  s.t = 0;
  return s;
}

RunResult run(const ScenarioConfig& cfg, const fs::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  fs::create_directories(out_dir);
  const json ex = normalize_experiment(cfg.command, cfg.experiment);
  ScenarioConfig resolved = cfg;
  resolved.experiment = ex;

  PlateParams p = cfg.params;
  p.validate();
  Context c{resolved, ex, out_dir, find_spectrum(p, cfg.spectrum), {}};
  const std::string spectrum_hash = io::sha256_hex(spectrum_csv(c.table));

  RunResult r;
  r.dir = out_dir;
  r.summary = run_command(c);
  c.jsonfile("summary.json", r.summary);
  r.artifacts = c.artifacts;
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.manifest = {{"manifest_version", 1},
                {"tool", "platelab"},
                {"tool_version", kToolVersion},
                {"command", cfg.command},
                {"seed", cfg.seed},
                {"threads", cfg.threads},
                {"config", to_json(resolved)},
                {"spectrum_sha256", spectrum_hash},
                {"artifacts", r.artifacts},
                {"started_utc", started},
                {"wall_time_s", wall}};
  io::write_json(out_dir / "manifest.json", r.manifest);
  return r;
}

}  // namespace platelab
