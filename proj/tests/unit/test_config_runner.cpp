#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch_amalgamated.hpp"

#include "platelab/config.hpp"
#include "platelab/errors.hpp"
#include "platelab/io.hpp"
#include "platelab/runner.hpp"

using namespace platelab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "platelab_test_config_runner" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("mode labels round-trip") {
  for (const ModeKey k : {ModeKey{1, Parity::even, 1}, ModeKey{12, Parity::odd, 3}}) CHECK(parse_mode_label(mode_label(k)) == k);
  CHECK(mode_label({2, Parity::odd, 1}) == "2o1");
  CHECK_THROWS_AS(parse_mode_label("0e1"), ConfigError);
  CHECK_THROWS_AS(parse_mode_label("1x1"), ConfigError);
  CHECK_THROWS_AS(parse_mode_label("1e"), ConfigError);
}

TEST_CASE("defaults are filled in and survive a round trip") {
  const ScenarioConfig c = parse_config(json{{"command", "decay"}});
  CHECK(c.command == "decay");
  CHECK(c.modes.size() == 6);
  CHECK(c.experiment["runs"] == 4);
  CHECK(c.experiment["target"] == "auto");
  const json a = to_json(c);
  const json b = to_json(parse_config(a));
  CHECK(a == b);

  const ScenarioConfig d = parse_config(json{{"command", "simulate"},
                                             {"seed", 17},
                                             {"params", {{"alpha", -12.5}, {"k", 0.3}, {"forcing", {{"type", "harmonic"}, {"c", 0.4}, {"m", 2}}}}},
                                             {"truncation", {{"modes", {"1e1", "2e1", "2o1"}}, {"abs_tol", 1e-9}}},
                                             {"initial", {{"kind", "random"}, {"norm", 2.0}}},
                                             {"experiment", {{"t_final", 3}}}});
  CHECK(d.seed == 17);
  CHECK(d.params.alpha == -12.5);
  CHECK(d.params.forcing.m == 2);
  CHECK(d.modes.size() == 3);
  CHECK(d.abs_tol == 1e-9);
  CHECK(d.initial.kind == InitialData::Kind::random);
  CHECK(d.experiment["t_final"] == 3);
  CHECK(d.experiment["nu"] == 0);
  CHECK(to_json(parse_config(to_json(d))) == to_json(d));
}

TEST_CASE("strict parsing names the offending path") {
  CHECK(config_error({{"command", "spectrum"}, {"params", {{"alpha", 1}, {"beta", 2}}}}).find("params.beta") != std::string::npos);
  CHECK(config_error({{"command", "spectrum"}, {"bogus", 1}}).find("bogus") != std::string::npos);
  CHECK(config_error({{"command", "decay"}, {"experiment", {{"runz", 1}}}}).find("experiment.runz") != std::string::npos);
  CHECK(config_error({{"command", "simulate"}, {"params", {{"k", "fast"}}}}).find("params.k") != std::string::npos);
  CHECK_FALSE(config_error({{"command", "launch"}}).empty());
  CHECK_FALSE(config_error({{"command", "simulate"}, {"truncation", {{"modes", {"1e1", "1e1"}}}}}).empty());
  CHECK_FALSE(config_error({{"command", "sweep"}, {"experiment", {{"inner", "sweep"}}}}).empty());
  CHECK_THROWS_AS(experiment_defaults("nope"), ConfigError);
}

TEST_CASE("runs are byte-reproducible across repeats and thread counts") {
  json j = {{"command", "simulate"},
            {"seed", 3},
            {"params", {{"alpha", -40}, {"k", 0.2}}},
            {"initial", {{"kind", "random"}, {"norm", 1.5}}},
            {"experiment", {{"t_final", 4}}}};
  const RunResult a = run(parse_config(j), scratch("sim_a"));
  const RunResult b = run(parse_config(j), scratch("sim_b"));
  CHECK(slurp(a.dir / "trajectory.csv") == slurp(b.dir / "trajectory.csv"));
  CHECK(a.artifacts == b.artifacts);
  CHECK(a.summary == b.summary);

  json s = {{"command", "stationary"}, {"params", {{"alpha", -300}}}, {"experiment", {{"n_starts", 24}}}};
  s["threads"] = 1;
  const RunResult c = run(parse_config(s), scratch("stat_1"));
  s["threads"] = 3;
  const RunResult d = run(parse_config(s), scratch("stat_3"));
  CHECK(slurp(c.dir / "equilibria.json") == slurp(d.dir / "equilibria.json"));
  CHECK(c.summary == d.summary);
}

TEST_CASE("manifest records hashes and re-runs to the same artifacts") {
  const RunResult r = run(parse_config(json{{"command", "thresholds"}, {"params", {{"k", 0.5}}}}), scratch("thr"));
  const json m = json::parse(slurp(r.dir / "manifest.json"));
  CHECK(m["manifest_version"] == 1);
  CHECK(m["tool_version"] == kToolVersion);
  CHECK(m["command"] == "thresholds");
  for (const auto& [name, hash] : r.artifacts) CHECK(io::sha256_hex(slurp(r.dir / name)) == hash);
  CHECK(m["artifacts"].size() == r.artifacts.size());

  const RunResult again = run(load_config((r.dir / "manifest.json").string()), scratch("thr_again"));
  CHECK(again.artifacts == r.artifacts);
}

TEST_CASE("an empty sweep writes a header-only table") {
  const RunResult r = run(parse_config(json{{"command", "sweep"},
                                            {"experiment", {{"inner", "thresholds"}, {"parameter", "k"}, {"values", json::array()}}}}),
                          scratch("sweep_empty"));
  CHECK(slurp(r.dir / "sweep.csv") == "index,k,status\n");
  CHECK(r.summary["points"] == 0);
  CHECK(json::parse(slurp(r.dir / "sweep_errors.json")).empty());
}

TEST_CASE("a sweep isolates failing points") {
  const RunResult r =
      run(parse_config(json{{"command", "sweep"},
                            {"params", {{"k", 0.5}}},
                            {"experiment", {{"inner", "thresholds"}, {"parameter", "P"}, {"values", {0.0, 5.0, 0.2}}}}}),
          scratch("sweep_mixed"));
  CHECK(r.summary["failed"] == 1);
  const json errs = json::parse(slurp(r.dir / "sweep_errors.json"));
  CHECK(errs.contains("1"));
  std::istringstream csv(slurp(r.dir / "sweep.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);
  CHECK(fs::exists(r.dir / "points" / "point_0002" / "thresholds.json"));
}

TEST_CASE("initial data kinds") {
  const ScenarioConfig z = parse_config(json{{"command", "simulate"}});
  const SpectrumTable t = find_spectrum(z.params, z.spectrum);
  const ModalSystem sys(z.params, t, z.truncation(t).keys);
  CHECK(initial_state(z, sys, t).h.norm() == 0.0);
  const ScenarioConfig m =
      parse_config(json{{"command", "simulate"}, {"initial", {{"kind", "modal"}, {"h", {{"2e1", 0.7}}}}}});
  const ModalState s = initial_state(m, sys, t);
  CHECK(s.h(2) == 0.7);
  CHECK(s.h.cwiseAbs().sum() == 0.7);
  const ScenarioConfig bad =
      parse_config(json{{"command", "simulate"}, {"initial", {{"kind", "modal"}, {"h", {{"5e1", 0.7}}}}}});
  CHECK_THROWS(initial_state(bad, sys, t));
}
