#include "stancebench/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "stancebench/error.hpp"
#include "stancebench/hashing.hpp"

namespace stancebench {

using json = nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); }

void check_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) invalid(std::string(section) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) invalid("unknown key '" + std::string(section) + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void AppConfig::validate() const {
  model.validate();
  vision.validate();
  prompt.validate();
  if (!(train.optimizer.lr > 0)) invalid("train.lr must be positive");
  if (!(train.optimizer.decay > 0 && train.optimizer.decay < 1)) invalid("train.decay must be in (0, 1)");
  if (train.steps < 0) invalid("train.steps must be >= 0");
  if (train.batch < 1) invalid("train.batch must be >= 1");
  if (train.max_new_tokens < 0) invalid("train.max_new_tokens must be >= 0");
  if (split.train < 0 || split.val < 0 || split.test < 0 ||
      std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
    invalid("split ratios must be non-negative and sum to 1");
  }
  if (filters.min_post_words > filters.max_post_words) {
    invalid("filters.min_post_words exceeds filters.max_post_words");
  }
}

AppConfig parse_app_config(std::string_view json_text) {
  AppConfig c;
  try {
    const json j = json::parse(json_text);
    check_keys(j, "config", {"model", "vision", "train", "prompt", "filters", "split", "protocol"});
    if (j.contains("model")) {
      const auto& m = j["model"];
      check_keys(m, "model", {"d_v", "layers", "heads", "lora_rank", "lora_alpha", "seed", "max_len",
                              "mlp_ratio", "init_std"});
      read(m, "d_v", c.model.d_model);
      read(m, "layers", c.model.layers);
      read(m, "heads", c.model.heads);
      read(m, "lora_rank", c.model.lora_rank);
      c.model.lora_alpha = c.model.lora_rank;
      read(m, "lora_alpha", c.model.lora_alpha);
      read(m, "seed", c.model.seed);
      read(m, "max_len", c.model.max_len);
      read(m, "mlp_ratio", c.model.mlp_ratio);
      read(m, "init_std", c.model.init_std);
    }
    c.vision.seed = c.model.seed;
    if (j.contains("vision")) {
      const auto& v = j["vision"];
      check_keys(v, "vision", {"resolution", "patch_size", "width", "layers", "heads", "mlp_ratio",
                               "init_std", "class_only", "seed"});
      read(v, "resolution", c.vision.resolution);
      read(v, "patch_size", c.vision.patch_size);
      read(v, "width", c.vision.width);
      read(v, "layers", c.vision.layers);
      read(v, "heads", c.vision.heads);
      read(v, "mlp_ratio", c.vision.mlp_ratio);
      read(v, "init_std", c.vision.init_std);
      read(v, "class_only", c.vision.class_only);
      read(v, "seed", c.vision.seed);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      check_keys(t, "train", {"lr", "decay", "steps", "batch", "max_new_tokens"});
      read(t, "lr", c.train.optimizer.lr);
      read(t, "decay", c.train.optimizer.decay);
      read(t, "steps", c.train.steps);
      read(t, "batch", c.train.batch);
      read(t, "max_new_tokens", c.train.max_new_tokens);
    }
    if (j.contains("prompt")) c.prompt = parse_template_config(j["prompt"].dump());
    if (j.contains("filters")) {
      const auto& f = j["filters"];
      check_keys(f, "filters", {"require_relevance", "min_comments", "min_post_words",
                                "max_post_words", "min_latin_share", "require_image"});
      read(f, "require_relevance", c.filters.require_relevance);
      read(f, "min_comments", c.filters.min_comments);
      read(f, "min_post_words", c.filters.min_post_words);
      read(f, "max_post_words", c.filters.max_post_words);
      read(f, "min_latin_share", c.filters.min_latin_share);
      read(f, "require_image", c.filters.require_image);
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      check_keys(s, "split", {"train", "val", "test"});
      read(s, "train", c.split.train);
      read(s, "val", c.split.val);
      read(s, "test", c.split.test);
    }
    if (j.contains("protocol")) {
      const auto& p = j["protocol"];
      check_keys(p, "protocol", {"cross_target_dest"});
      if (p.contains("cross_target_dest")) {
        const auto v = p["cross_target_dest"].get<std::string>();
        if (v != "full" && v != "test") invalid("protocol.cross_target_dest must be 'full' or 'test'");
        c.protocol.cross_target_full_dest = v == "full";
      }
    }
  } catch (const json::exception& e) {
    invalid(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_app_config(buf.str());
}

std::string app_config_to_json(const AppConfig& c) {
  json j;
  j["model"] = {{"d_v", c.model.d_model},           {"layers", c.model.layers},
                {"heads", c.model.heads},           {"lora_rank", c.model.lora_rank},
                {"lora_alpha", c.model.lora_alpha}, {"seed", c.model.seed},
                {"max_len", c.model.max_len},       {"mlp_ratio", c.model.mlp_ratio},
                {"init_std", c.model.init_std}};
  j["vision"] = {{"resolution", c.vision.resolution}, {"patch_size", c.vision.patch_size},
                 {"width", c.vision.width},           {"layers", c.vision.layers},
                 {"heads", c.vision.heads},           {"mlp_ratio", c.vision.mlp_ratio},
                 {"init_std", c.vision.init_std},     {"class_only", c.vision.class_only},
                 {"seed", c.vision.seed}};
  j["train"] = {{"lr", c.train.optimizer.lr},
                {"decay", c.train.optimizer.decay},
                {"steps", c.train.steps},
                {"batch", c.train.batch},
                {"max_new_tokens", c.train.max_new_tokens}};
  j["prompt"] = json::parse(template_config_to_json(c.prompt));
  j["filters"] = {{"require_relevance", c.filters.require_relevance},
                  {"min_comments", c.filters.min_comments},
                  {"min_post_words", c.filters.min_post_words},
                  {"max_post_words", c.filters.max_post_words},
                  {"min_latin_share", c.filters.min_latin_share},
                  {"require_image", c.filters.require_image}};
  j["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}};
  j["protocol"] = {{"cross_target_dest", c.protocol.cross_target_full_dest ? "full" : "test"}};
  return j.dump(2) + "\n";
}

std::string config_hash(const AppConfig& config) { return sha256_hex(app_config_to_json(config)); }

}  // namespace stancebench
