#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stancebench/config.hpp"
#include "stancebench/corpus.hpp"
#include "stancebench/eval.hpp"
#include "stancebench/fusion.hpp"
#include "stancebench/prompt.hpp"

namespace stancebench {

// On-disk corpus directory: instances.jsonl, images/, captions.jsonl (optional).
struct CorpusBundle {
  std::vector<Instance> instances;
  std::filesystem::path image_root;
  std::map<std::string, std::string> captions;
};

CorpusBundle load_corpus_dir(const std::filesystem::path& dir);
// SHA-256 over the canonical instance lines.
std::string corpus_hash(const std::vector<Instance>& instances);

// Turns instances into model inputs. Captions come from the stub captioner;
// encoder features are computed once per image.
class ExampleBuilder {
 public:
  ExampleBuilder(const CorpusBundle& corpus, const PromptTemplateConfig& prompt,
                 const MultimodalModel& model);

  PromptBundle prompt_for(const Instance& instance);
  // Frozen encoder features for the first post image; 0 rows without images.
  Mat features_for(const Instance& instance);
  TrainExample example_for(const Instance& instance);

 private:
  const CorpusBundle& corpus_;
  PromptTemplateConfig prompt_;
  const MultimodalModel& model_;
  std::unique_ptr<StubCaptioner> captioner_;
  std::vector<int> p_v_tokens_;
  std::map<std::string, Mat> feature_cache_;
};

// Shuffled mini-batches, `steps` updates. Deterministic in `seed`.
TrainState train_model(MultimodalModel& model, const std::vector<TrainExample>& examples,
                       const TrainConfig& config, std::uint64_t seed);

std::vector<PredictionRecord> predict(const MultimodalModel& model,
                                      const std::vector<TrainExample>& examples,
                                      const std::vector<const Instance*>& instances,
                                      int max_new_tokens, int threads = 1);

enum class ProtocolMode { InTarget, CrossTarget };
std::string_view to_string(ProtocolMode mode);

struct ProtocolSpec {
  ProtocolMode mode = ProtocolMode::InTarget;
  std::string source;  // target group; ignored for InTarget
  std::string dest;
  AblationFlags ablation;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ProtocolResult {
  EvalReport report;  // manifest embedded
  DepthBucketReport depth;
  std::vector<PredictionRecord> predictions;
  std::vector<double> loss_history;
  std::string prompt_hash;
};

// Applies the ablation flags and seed on top of `config`, trains, predicts,
// scores. Throws ProtocolError for a cross-target run with source == dest or
// when a required split is empty.
ProtocolResult run_protocol(const ProtocolSpec& spec, const AppConfig& config,
                            const CorpusBundle& corpus);

}  // namespace stancebench
