#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "platelab/modal.hpp"
#include "platelab/params.hpp"
#include "platelab/spectrum.hpp"

namespace platelab {

// Compact mode label: "<m><e|o><branch>", e.g. "2o1".
std::string mode_label(const ModeKey& key);
ModeKey parse_mode_label(const std::string& label, const std::string& path = "mode");

struct InitialData {
  enum class Kind { zero, modal, random, unimodal };
  Kind kind = Kind::zero;
  std::vector<std::pair<ModeKey, double>> h, hdot;  // modal
  double norm = 1.0;                                // random: Y-norm
  int m = 1;                                        // unimodal preset phi0 U + dphi0 U at params.alpha
  double phi0 = 0.5, dphi0 = 0.0;
};

struct ScenarioConfig {
  std::string command = "spectrum";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  PlateParams params;
  SpectrumOptions spectrum;
  std::vector<ModeKey> modes;  // truncation keys; empty with first_n == 0 means the default set
  std::size_t first_n = 0;
  double abs_tol = 1e-10, rel_tol = 1e-10, stride = 0.01;
  InitialData initial;
  nlohmann::json experiment = nlohmann::json::object();  // complete after parsing: defaults filled in

  TruncationSpec truncation(const SpectrumTable& table) const;
};

const std::vector<std::string>& command_names();

// Defaults of the experiment block for a command; throws ConfigError for unknown commands.
nlohmann::json experiment_defaults(const std::string& command);

// Strict parse: unknown keys and wrong types raise ConfigError naming the offending path.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& c);

// Fills defaults and checks an experiment block against the command's schema.
nlohmann::json normalize_experiment(const std::string& command, const nlohmann::json& block,
                                    const std::string& path = "experiment");

}  // namespace platelab
