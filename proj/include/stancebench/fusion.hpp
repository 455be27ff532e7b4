#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stancebench/checkpoint.hpp"
#include "stancebench/nn.hpp"
#include "stancebench/prompt.hpp"
#include "stancebench/stance.hpp"
#include "stancebench/vision.hpp"

namespace stancebench {

struct ModelConfig {
  int d_model = 64;  // fusion width d_v
  int layers = 2;
  int heads = 4;
  int vocabulary_size = kVocabularySize;
  int max_len = 1024;
  int lora_rank = 4;
  double lora_alpha = 4.0;
  int mlp_ratio = 4;
  double init_std = 0.02;
  std::uint64_t seed = 0;

  double lora_scale() const { return lora_alpha / lora_rank; }
  // Throws ConfigInvalid.
  void validate() const;
};

// ---- input layout -----------------------------------------------------------

enum class SegmentKind {
  InstBegin,
  VisualPrefix,
  ImgBegin,
  Visual,
  ImgEnd,
  Text,
  InstEnd,
  AnswerStart,
  Answer,
};
std::string_view to_string(SegmentKind kind);

struct Segment {
  SegmentKind kind;
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - begin; }
};

inline constexpr int kVisualSlot = -1;

// [INST] P^V <Img> Γ^V </Img> Γ^T [/INST] (+ optional answer span).
struct FusionInput {
  std::vector<int> tokens;  // token id per position, kVisualSlot inside the Γ^V span
  Mat visual;               // Γ^V rows, in order
  std::vector<Segment> segments;

  std::size_t length() const { return tokens.size(); }
  const Segment& segment(SegmentKind kind) const;
  std::vector<int> visual_prefix_tokens() const;
  Mat visual_rows() const;
  std::vector<int> text_tokens() const;
  std::vector<int> answer_tokens() const;
};

FusionInput assemble_input(std::span<const int> p_v_tokens, const Mat& visual,
                           std::span<const int> text_tokens, const ModelConfig& config);

// Appends the answer-start marker and any supervised answer tokens.
FusionInput with_answer(FusionInput input, std::span<const int> answer_tokens,
                        const ModelConfig& config);

// Label word bytes followed by the stop id.
std::vector<int> answer_tokens(StanceLabel label);
inline constexpr int kStopToken = token_id(Marker::InstEnd);

// ---- model ------------------------------------------------------------------

struct DecoderWeights {
  Mat byte_emb;  // 256 × d (frozen)
  Mat pos_emb;   // max_len × d (frozen)
  std::vector<BlockWeights> blocks;
  LayerNormWeights ln_f;
  Mat w_out;  // d × vocabulary
};

struct LayerAdapters {
  LoraAdapter q;
  LoraAdapter v;
};

struct MultimodalModel {
  ModelConfig config;
  VisionConfig vision_config;
  VisionParams vision;   // encoder frozen, w_proj trainable
  DecoderWeights decoder;  // frozen
  Mat marker_emb;        // (vocabulary - 256) × d, trainable
  std::vector<LayerAdapters> adapters;  // trainable, one pair per decoder layer
  bool adapters_enabled = true;

  static MultimodalModel init(const ModelConfig& config, const VisionConfig& vision_config);

  TensorStore to_tensors() const;
  static MultimodalModel from_tensors(const TensorStore& store, const ModelConfig& config,
                                      const VisionConfig& vision_config);
  // Hash over every frozen tensor (decoder, encoder, E, E_pos, x_class).
  std::string frozen_hash() const;
  std::string trainable_hash() const;
};

Mat embed_input(const FusionInput& input, const MultimodalModel& model);

// Logits for every position, T × vocabulary.
Mat forward(const FusionInput& input, const MultimodalModel& model);

// ---- training ---------------------------------------------------------------

struct TrainExample {
  std::vector<int> visual_prefix;  // P^V tokens
  Mat features;                    // frozen encoder output, M × D_enc (M may be 0)
  std::vector<int> text;           // Γ^T tokens
  std::vector<int> answer;         // supervised tokens after answer-start
};

// Γ^V from the current projection, then the assembled input (no answer span).
FusionInput example_input(const TrainExample& example, const MultimodalModel& model);

struct ModelGradients {
  std::vector<BlockAdapterGrads> adapters;
  Mat marker_emb;
  Mat w_proj;

  static ModelGradients zeros_like(const MultimodalModel& model);
};

// Mean token-level cross-entropy over all answer tokens in the batch.
// Fills `grads` (zeroed first) for the trainable groups when non-null.
double loss_and_gradients(std::span<const TrainExample> batch, const MultimodalModel& model,
                          ModelGradients* grads);

struct OptimizerConfig {
  double lr = 1e-3;
  double decay = 0.999;
  double eps = 1e-8;
};

struct TrainState {
  std::size_t step = 0;
  ModelGradients second_moment;
  std::vector<double> loss_history;
};

TrainState init_train_state(const MultimodalModel& model);

// One update of the trainable groups; returns the batch loss before the update.
double train_step(std::span<const TrainExample> batch, MultimodalModel& model, TrainState& state,
                  const OptimizerConfig& optimizer);

// ---- inference --------------------------------------------------------------

// Greedy decoding after the answer-start marker, until the stop id.
std::string generate(const FusionInput& input, const MultimodalModel& model,
                     int max_new_tokens);

enum class MatchMethod { Exact, EditDistance, Fallback };
std::string_view to_string(MatchMethod method);

struct Prediction {
  std::string generated_text;
  StanceLabel matched = StanceLabel::None;
  MatchMethod method = MatchMethod::Fallback;
};

// Edit distance counting adjacent transpositions as one edit.
int edit_distance(std::string_view a, std::string_view b);

Prediction match_label(std::string_view generated_text);

}  // namespace stancebench
