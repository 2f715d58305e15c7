#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "platelab/config.hpp"

namespace platelab {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunResult {
  std::filesystem::path dir;
  nlohmann::json summary;   // flat key -> scalar, also written to summary.json
  nlohmann::json manifest;  // written to manifest.json
  std::map<std::string, std::string> artifacts;  // file name -> sha256
};

// Executes cfg.command and writes its artifacts, summary.json and manifest.json into out_dir.
// Everything except the manifest's timing fields is a deterministic function of cfg.
RunResult run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// Initial modal state described by cfg.initial on the truncation of sys.
ModalState initial_state(const ScenarioConfig& cfg, const ModalSystem& sys, const SpectrumTable& table);

}  // namespace platelab
