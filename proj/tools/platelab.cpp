// platelab: command-line front end for the plate experiments.
#include <cstdio>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "platelab/config.hpp"
#include "platelab/errors.hpp"
#include "platelab/runner.hpp"

namespace {

using nlohmann::json;

// "1..5" or "1,3,4" or "2"
std::vector<int> int_range(const std::string& s) {
  static const std::regex range("^([0-9]+)\\.\\.([0-9]+)$");
  std::smatch m;
  std::vector<int> out;
  if (std::regex_match(s, m, range)) {
    for (int i = std::stoi(m[1]); i <= std::stoi(m[2]); ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stoi(tok));
  return out;
}

std::pair<double, double> real_range(const std::string& s) {
  const auto pos = s.find("..");
  if (pos == std::string::npos) throw CLI::ValidationError("--mu", "expected lo..hi");
  return {std::stod(s.substr(0, pos)), std::stod(s.substr(pos + 2))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hinged-free plate experiments: spectrum, dynamics, equilibria, stability, determining modes"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> tol;
  std::vector<std::string> param_sets, exp_sets;
  std::string m_range, mu_range;

  std::vector<std::string> names = platelab::command_names();
  names.push_back("run");
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name, name == "run" ? "run the command named in the config" : "run '" + name + "'");
    sub->add_option("--config", config_path, "scenario JSON (or a previous manifest.json)")
        ->check(CLI::ExistingFile)
        ->required(name == "run");
    sub->add_option("--out", out_dir, "output directory (default runs/<command>)");
    sub->add_option("--seed", seed, "64-bit seed");
    sub->add_option("--threads", threads, "worker threads (0: hardware)");
    sub->add_option("--tol", tol, "integrator absolute and relative tolerance");
    sub->add_option("--param", param_sets, "override a plate parameter, e.g. --param alpha=-300");
    sub->add_option("--set", exp_sets, "override an experiment field with a JSON value, e.g. --set t_final=50");
    if (name == "branch") {
      sub->add_option("--m", m_range, "x-frequencies, e.g. 1..5");
      sub->add_option("--mu", mu_range, "mu interval, e.g. 0..100");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    json cfg_json = json::object();
    if (!config_path.empty()) cfg_json = platelab::to_json(platelab::load_config(config_path));
    if (command != "run") {
      if (cfg_json.value("command", command) != command) cfg_json["experiment"] = json::object();
      cfg_json["command"] = command;
    }
    if (!cfg_json.contains("experiment")) cfg_json["experiment"] = json::object();
    for (const std::string& s : param_sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw platelab::ConfigError("--param", "expected name=value");
      cfg_json["params"][s.substr(0, eq)] = std::stod(s.substr(eq + 1));
    }
    for (const std::string& s : exp_sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw platelab::ConfigError("--set", "expected name=json");
      cfg_json["experiment"][s.substr(0, eq)] = json::parse(s.substr(eq + 1));
    }
    if (!m_range.empty()) cfg_json["experiment"]["m"] = int_range(m_range);
    if (!mu_range.empty()) {
      const auto [lo, hi] = real_range(mu_range);
      cfg_json["experiment"]["mu_lo"] = lo;
      cfg_json["experiment"]["mu_hi"] = hi;
    }
    if (seed) cfg_json["seed"] = *seed;
    if (threads) cfg_json["threads"] = *threads;
    if (tol) {
      cfg_json["truncation"]["abs_tol"] = *tol;
      cfg_json["truncation"]["rel_tol"] = *tol;
    }
    const platelab::ScenarioConfig cfg = platelab::parse_config(cfg_json);
    if (out_dir.empty()) out_dir = "runs/" + cfg.command;
    const platelab::RunResult r = platelab::run(cfg, out_dir);
    std::cout << r.summary.dump(2) << "\n";
    std::cerr << "wrote " << r.artifacts.size() << " artifacts and manifest.json to " << r.dir.string() << "\n";
    return 0;
  } catch (const platelab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const platelab::InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const platelab::RootSearchError& e) {
    std::cerr << "root search failed: " << e.what() << " on [" << e.lo() << ", " << e.hi() << "]\n";
    return 3;
  } catch (const platelab::IntegrationError& e) {
    std::cerr << "integration failed at t=" << e.t() << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
