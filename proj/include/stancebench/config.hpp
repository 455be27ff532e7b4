#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stancebench/corpus.hpp"
#include "stancebench/fusion.hpp"
#include "stancebench/prompt.hpp"
#include "stancebench/vision.hpp"

namespace stancebench {

struct TrainConfig {
  OptimizerConfig optimizer;
  int steps = 200;
  int batch = 4;
  int max_new_tokens = 12;
};

struct ProtocolConfig {
  // Cross-target runs test on every labeled destination instance, or only
  // on the destination's test split when false.
  bool cross_target_full_dest = true;
};

// One flat file: {"model", "vision", "train", "prompt", "filters", "split",
// "protocol"}; every section and key is optional.
struct AppConfig {
  ModelConfig model;
  VisionConfig vision;
  TrainConfig train;
  PromptTemplateConfig prompt;
  FilterConfig filters;
  SplitRatios split;
  ProtocolConfig protocol;

  // Throws ConfigInvalid (TemplateInvalid for prompt problems).
  void validate() const;
};

AppConfig parse_app_config(std::string_view json_text);
AppConfig load_app_config(const std::filesystem::path& path);

// Canonical JSON (fixed key order) used for hashing and manifests.
std::string app_config_to_json(const AppConfig& config);
std::string config_hash(const AppConfig& config);

}  // namespace stancebench
