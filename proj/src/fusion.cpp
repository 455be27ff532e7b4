#include "stancebench/fusion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "stancebench/error.hpp"

namespace stancebench {

namespace {

constexpr int kByteTokens = 256;

void check_length(std::size_t required, const ModelConfig& config) {
  if (required > static_cast<std::size_t>(config.max_len)) {
    throw Error(ErrorKind::SequenceTooLong,
                "sequence needs " + std::to_string(required) + " positions, max is " +
                    std::to_string(config.max_len));
  }
}

void push_segment(FusionInput& in, SegmentKind kind, std::size_t count) {
  const std::size_t begin = in.tokens.size();
  in.segments.push_back({kind, begin, begin + count});
}

void append_tokens(FusionInput& in, SegmentKind kind, std::span<const int> ids, int vocabulary) {
  for (int id : ids) {
    if (id < 0 || id >= vocabulary) {
      throw Error(ErrorKind::TokenOutOfRange, "token id " + std::to_string(id) + " in " +
                                                  std::string(to_string(kind)) + " segment");
    }
  }
  push_segment(in, kind, ids.size());
  in.tokens.insert(in.tokens.end(), ids.begin(), ids.end());
}

void append_marker(FusionInput& in, SegmentKind kind, Marker marker) {
  push_segment(in, kind, 1);
  in.tokens.push_back(token_id(marker));
}

BlockAdapters adapters_for(const MultimodalModel& model, std::size_t layer) {
  if (!model.adapters_enabled) return {};
  return {&model.adapters[layer].q, &model.adapters[layer].v};
}

struct DecoderCache {
  std::vector<BlockCache> blocks;
  Mat lnf_xhat;
  Eigen::VectorXd lnf_rstd;
};

// Hidden states after the final layer norm, T × d.
Mat decoder_hidden(const Mat& x0, const MultimodalModel& model, DecoderCache* cache) {
  Mat x = x0;
  const auto& blocks = model.decoder.blocks;
  if (cache != nullptr) cache->blocks.resize(blocks.size());
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    x = block_forward(x, blocks[l], model.config.heads, /*causal=*/true, adapters_for(model, l),
                      cache != nullptr ? &cache->blocks[l] : nullptr);
  }
  Mat h = layer_norm(x, model.decoder.ln_f, cache != nullptr ? &cache->lnf_xhat : nullptr,
                     cache != nullptr ? &cache->lnf_rstd : nullptr);
  if (!h.allFinite()) throw Error(ErrorKind::NumericalError, "non-finite decoder state");
  return h;
}

template <typename F>
void for_each_group(MultimodalModel& model, ModelGradients& grads, ModelGradients& moments, F&& f) {
  for (std::size_t l = 0; l < model.adapters.size(); ++l) {
    f(model.adapters[l].q.a, grads.adapters[l].dqa, moments.adapters[l].dqa);
    f(model.adapters[l].q.b, grads.adapters[l].dqb, moments.adapters[l].dqb);
    f(model.adapters[l].v.a, grads.adapters[l].dva, moments.adapters[l].dva);
    f(model.adapters[l].v.b, grads.adapters[l].dvb, moments.adapters[l].dvb);
  }
  f(model.marker_emb, grads.marker_emb, moments.marker_emb);
  f(model.vision.w_proj, grads.w_proj, moments.w_proj);
}

void add_trainable(TensorStore& store, const MultimodalModel& m) {
  store.add("decoder.marker_emb", m.marker_emb, false);
  for (std::size_t l = 0; l < m.adapters.size(); ++l) {
    const std::string p = "decoder.layers." + std::to_string(l) + ".lora.";
    store.add(p + "q.a", m.adapters[l].q.a, false);
    store.add(p + "q.b", m.adapters[l].q.b, false);
    store.add(p + "v.a", m.adapters[l].v.a, false);
    store.add(p + "v.b", m.adapters[l].v.b, false);
  }
  store.add("vision.w_proj", m.vision.w_proj, false);
}

void add_block(TensorStore& store, const std::string& p, const BlockWeights& b) {
  store.add(p + "ln1.gamma", b.ln1.gamma, true);
  store.add(p + "ln1.beta", b.ln1.beta, true);
  store.add(p + "wq", b.wq, true);
  store.add(p + "wk", b.wk, true);
  store.add(p + "wv", b.wv, true);
  store.add(p + "wo", b.wo, true);
  store.add(p + "ln2.gamma", b.ln2.gamma, true);
  store.add(p + "ln2.beta", b.ln2.beta, true);
  store.add(p + "w1", b.w1, true);
  store.add(p + "b1", b.b1, true);
  store.add(p + "w2", b.w2, true);
  store.add(p + "b2", b.b2, true);
}

BlockWeights read_block(const TensorStore& s, const std::string& p) {
  BlockWeights b;
  b.ln1 = {s.row_vector(p + "ln1.gamma"), s.row_vector(p + "ln1.beta")};
  b.wq = s.matrix(p + "wq");
  b.wk = s.matrix(p + "wk");
  b.wv = s.matrix(p + "wv");
  b.wo = s.matrix(p + "wo");
  b.ln2 = {s.row_vector(p + "ln2.gamma"), s.row_vector(p + "ln2.beta")};
  b.w1 = s.matrix(p + "w1");
  b.b1 = s.row_vector(p + "b1");
  b.w2 = s.matrix(p + "w2");
  b.b2 = s.row_vector(p + "b2");
  return b;
}

void add_frozen(TensorStore& store, const MultimodalModel& m) {
  store.add("decoder.byte_emb", m.decoder.byte_emb, true);
  store.add("decoder.pos_emb", m.decoder.pos_emb, true);
  for (std::size_t l = 0; l < m.decoder.blocks.size(); ++l) {
    add_block(store, "decoder.layers." + std::to_string(l) + ".", m.decoder.blocks[l]);
  }
  store.add("decoder.ln_f.gamma", m.decoder.ln_f.gamma, true);
  store.add("decoder.ln_f.beta", m.decoder.ln_f.beta, true);
  store.add("decoder.w_out", m.decoder.w_out, true);
  store.add("vision.embed", m.vision.embed, true);
  store.add("vision.pos", m.vision.pos, true);
  store.add("vision.cls", m.vision.cls, true);
  for (std::size_t l = 0; l < m.vision.blocks.size(); ++l) {
    add_block(store, "vision.layers." + std::to_string(l) + ".", m.vision.blocks[l]);
  }
}

std::string lowercase_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

void ModelConfig::validate() const {
  auto invalid = [](const std::string& m) { throw Error(ErrorKind::ConfigInvalid, "model: " + m); };
  if (d_model <= 0 || heads <= 0 || d_model % heads != 0) {
    invalid("d_v = " + std::to_string(d_model) + " is not divisible by heads = " +
            std::to_string(heads));
  }
  if (lora_rank < 1 || lora_rank > d_model) {
    invalid("LoRA rank " + std::to_string(lora_rank) + " must be in [1, d_v = " +
            std::to_string(d_model) + "]");
  }
  if (layers < 1) invalid("layers must be >= 1");
  if (vocabulary_size != kVocabularySize) {
    invalid("vocabulary_size must be " + std::to_string(kVocabularySize));
  }
  if (max_len < 8) invalid("max_len must be >= 8");
  if (mlp_ratio < 1) invalid("mlp_ratio must be >= 1");
  if (!(lora_alpha > 0)) invalid("lora_alpha must be positive");
  if (!(init_std > 0)) invalid("init_std must be positive");
}

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::InstBegin: return "inst";
    case SegmentKind::VisualPrefix: return "visual-prefix";
    case SegmentKind::ImgBegin: return "img-begin";
    case SegmentKind::Visual: return "visual";
    case SegmentKind::ImgEnd: return "img-end";
    case SegmentKind::Text: return "text";
    case SegmentKind::InstEnd: return "inst-end";
    case SegmentKind::AnswerStart: return "answer-start";
    case SegmentKind::Answer: return "answer";
  }
  return "?";
}

const Segment& FusionInput::segment(SegmentKind kind) const {
  for (const auto& s : segments) {
    if (s.kind == kind) return s;
  }
  throw Error(ErrorKind::DimensionError,
              "input has no " + std::string(to_string(kind)) + " segment");
}

std::vector<int> FusionInput::visual_prefix_tokens() const {
  const auto& s = segment(SegmentKind::VisualPrefix);
  return {tokens.begin() + static_cast<std::ptrdiff_t>(s.begin),
          tokens.begin() + static_cast<std::ptrdiff_t>(s.end)};
}

Mat FusionInput::visual_rows() const { return visual; }

std::vector<int> FusionInput::text_tokens() const {
  const auto& s = segment(SegmentKind::Text);
  return {tokens.begin() + static_cast<std::ptrdiff_t>(s.begin),
          tokens.begin() + static_cast<std::ptrdiff_t>(s.end)};
}

std::vector<int> FusionInput::answer_tokens() const {
  for (const auto& s : segments) {
    if (s.kind == SegmentKind::Answer) {
      return {tokens.begin() + static_cast<std::ptrdiff_t>(s.begin),
              tokens.begin() + static_cast<std::ptrdiff_t>(s.end)};
    }
  }
  return {};
}

FusionInput assemble_input(std::span<const int> p_v_tokens, const Mat& visual,
                           std::span<const int> text_tokens, const ModelConfig& config) {
  if (visual.rows() > 0 && visual.cols() != config.d_model) {
    throw Error(ErrorKind::DimensionError, "visual rows have width " +
                                               std::to_string(visual.cols()) + ", d_v is " +
                                               std::to_string(config.d_model));
  }
  const std::size_t m = static_cast<std::size_t>(visual.rows());
  check_length(p_v_tokens.size() + m + text_tokens.size() + 4, config);

  FusionInput in;
  in.visual = visual.rows() > 0 ? visual : Mat(0, config.d_model);
  append_marker(in, SegmentKind::InstBegin, Marker::Inst);
  append_tokens(in, SegmentKind::VisualPrefix, p_v_tokens, config.vocabulary_size);
  append_marker(in, SegmentKind::ImgBegin, Marker::ImgBegin);
  push_segment(in, SegmentKind::Visual, m);
  in.tokens.insert(in.tokens.end(), m, kVisualSlot);
  append_marker(in, SegmentKind::ImgEnd, Marker::ImgEnd);
  append_tokens(in, SegmentKind::Text, text_tokens, config.vocabulary_size);
  append_marker(in, SegmentKind::InstEnd, Marker::InstEnd);
  return in;
}

FusionInput with_answer(FusionInput input, std::span<const int> answer, const ModelConfig& config) {
  check_length(input.length() + 1 + answer.size(), config);
  append_marker(input, SegmentKind::AnswerStart, Marker::AnswerStart);
  append_tokens(input, SegmentKind::Answer, answer, config.vocabulary_size);
  return input;
}

std::vector<int> answer_tokens(StanceLabel label) {
  std::vector<int> out;
  for (unsigned char c : to_string(label)) out.push_back(c);
  out.push_back(kStopToken);
  return out;
}

MultimodalModel MultimodalModel::init(const ModelConfig& config, const VisionConfig& vision_config) {
  config.validate();
  vision_config.validate();
  MultimodalModel m;
  m.config = config;
  m.vision_config = vision_config;
  m.vision = VisionParams::init(vision_config, config.d_model);

  Rng rng(config.seed);
  const Eigen::Index d = config.d_model;
  m.decoder.byte_emb = random_normal(kByteTokens, d, config.init_std, rng);
  m.decoder.pos_emb = random_normal(config.max_len, d, config.init_std, rng);
  for (int l = 0; l < config.layers; ++l) {
    m.decoder.blocks.push_back(BlockWeights::init(d, d * config.mlp_ratio, config.init_std, rng));
  }
  m.decoder.ln_f = LayerNormWeights::identity(d);
  m.decoder.w_out =
      random_normal(d, config.vocabulary_size, 1.0 / std::sqrt(static_cast<double>(d)), rng);

  Rng trainable_rng(config.seed ^ 0x10a4ada97e5ULL);
  m.marker_emb = random_normal(config.vocabulary_size - kByteTokens, d, config.init_std,
                               trainable_rng);
  const double a_std = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < config.layers; ++l) {
    LayerAdapters ad;
    ad.q = LoraAdapter::init(d, config.lora_rank, config.lora_alpha, a_std, trainable_rng);
    ad.v = LoraAdapter::init(d, config.lora_rank, config.lora_alpha, a_std, trainable_rng);
    m.adapters.push_back(std::move(ad));
  }
  return m;
}

TensorStore MultimodalModel::to_tensors() const {
  TensorStore store;
  add_frozen(store, *this);
  add_trainable(store, *this);
  return store;
}

MultimodalModel MultimodalModel::from_tensors(const TensorStore& s, const ModelConfig& config,
                                              const VisionConfig& vision_config) {
  config.validate();
  vision_config.validate();
  MultimodalModel m;
  m.config = config;
  m.vision_config = vision_config;
  m.decoder.byte_emb = s.matrix("decoder.byte_emb");
  m.decoder.pos_emb = s.matrix("decoder.pos_emb");
  for (int l = 0; l < config.layers; ++l) {
    m.decoder.blocks.push_back(read_block(s, "decoder.layers." + std::to_string(l) + "."));
  }
  m.decoder.ln_f = {s.row_vector("decoder.ln_f.gamma"), s.row_vector("decoder.ln_f.beta")};
  m.decoder.w_out = s.matrix("decoder.w_out");
  m.marker_emb = s.matrix("decoder.marker_emb");
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "decoder.layers." + std::to_string(l) + ".lora.";
    LayerAdapters ad;
    ad.q.a = s.matrix(p + "q.a");
    ad.q.b = s.matrix(p + "q.b");
    ad.v.a = s.matrix(p + "v.a");
    ad.v.b = s.matrix(p + "v.b");
    ad.q.scale = ad.v.scale = config.lora_scale();
    m.adapters.push_back(std::move(ad));
  }
  m.vision.embed = s.matrix("vision.embed");
  m.vision.pos = s.matrix("vision.pos");
  m.vision.cls = s.row_vector("vision.cls");
  for (int l = 0; l < vision_config.layers; ++l) {
    m.vision.blocks.push_back(read_block(s, "vision.layers." + std::to_string(l) + "."));
  }
  m.vision.heads = vision_config.heads;
  m.vision.w_proj = s.matrix("vision.w_proj");

  if (m.decoder.byte_emb.cols() != config.d_model || m.decoder.pos_emb.rows() != config.max_len ||
      m.vision.w_proj.cols() != config.d_model ||
      m.adapters.front().q.a.rows() != config.lora_rank) {
    throw Error(ErrorKind::CheckpointError, "checkpoint shapes do not match the model config");
  }
  return m;
}

std::string MultimodalModel::frozen_hash() const {
  TensorStore store;
  add_frozen(store, *this);
  return store.hash(true);
}

std::string MultimodalModel::trainable_hash() const {
  TensorStore store;
  add_trainable(store, *this);
  return store.hash(false);
}

Mat embed_input(const FusionInput& input, const MultimodalModel& model) {
  const auto t = static_cast<Eigen::Index>(input.length());
  check_length(input.length(), model.config);
  Mat x(t, model.config.d_model);
  Eigen::Index visual_row = 0;
  for (Eigen::Index i = 0; i < t; ++i) {
    const int id = input.tokens[static_cast<std::size_t>(i)];
    if (id == kVisualSlot) {
      if (visual_row >= input.visual.rows()) {
        throw Error(ErrorKind::DimensionError, "more visual slots than visual rows");
      }
      x.row(i) = input.visual.row(visual_row++);
    } else if (id >= 0 && id < kByteTokens) {
      x.row(i) = model.decoder.byte_emb.row(id);
    } else if (id >= kByteTokens && id < model.config.vocabulary_size) {
      x.row(i) = model.marker_emb.row(id - kByteTokens);
    } else {
      throw Error(ErrorKind::TokenOutOfRange, "token id " + std::to_string(id));
    }
  }
  if (visual_row != input.visual.rows()) {
    throw Error(ErrorKind::DimensionError, "visual rows without matching slots");
  }
  x += model.decoder.pos_emb.topRows(t);
  return x;
}

Mat forward(const FusionInput& input, const MultimodalModel& model) {
  Mat logits = decoder_hidden(embed_input(input, model), model, nullptr) * model.decoder.w_out;
  if (!logits.allFinite()) throw Error(ErrorKind::NumericalError, "non-finite logits");
  return logits;
}

FusionInput example_input(const TrainExample& example, const MultimodalModel& model) {
  Mat visual = example.features.rows() > 0 ? project(example.features, model.vision.w_proj)
                                           : Mat(0, model.config.d_model);
  return assemble_input(example.visual_prefix, visual, example.text, model.config);
}

ModelGradients ModelGradients::zeros_like(const MultimodalModel& model) {
  ModelGradients g;
  for (const auto& ad : model.adapters) {
    BlockAdapterGrads bg;
    bg.resize_like({&ad.q, &ad.v});
    g.adapters.push_back(std::move(bg));
  }
  g.marker_emb = Mat::Zero(model.marker_emb.rows(), model.marker_emb.cols());
  g.w_proj = Mat::Zero(model.vision.w_proj.rows(), model.vision.w_proj.cols());
  return g;
}

double loss_and_gradients(std::span<const TrainExample> batch, const MultimodalModel& model,
                          ModelGradients* grads) {
  std::size_t total_targets = 0;
  for (const auto& ex : batch) total_targets += ex.answer.size();
  if (total_targets == 0) throw Error(ErrorKind::NoTargetTokens, "batch has no answer tokens");
  if (grads != nullptr) *grads = ModelGradients::zeros_like(model);

  const double inv_n = 1.0 / static_cast<double>(total_targets);
  double loss = 0.0;
  for (const auto& ex : batch) {
    if (ex.answer.empty()) continue;
    const FusionInput input = with_answer(example_input(ex, model), ex.answer, model.config);
    const Mat x0 = embed_input(input, model);
    DecoderCache cache;
    const Mat h = decoder_hidden(x0, model, grads != nullptr ? &cache : nullptr);

    const auto start = static_cast<Eigen::Index>(input.segment(SegmentKind::AnswerStart).begin);
    const auto n = static_cast<Eigen::Index>(ex.answer.size());
    Mat logits = h.middleRows(start, n) * model.decoder.w_out;
    if (!logits.allFinite()) throw Error(ErrorKind::NumericalError, "non-finite logits");
    Mat dlogits(n, logits.cols());
    for (Eigen::Index k = 0; k < n; ++k) {
      const int target = ex.answer[static_cast<std::size_t>(k)];
      const double mx = logits.row(k).maxCoeff();
      const RowVec e = (logits.row(k).array() - mx).exp().matrix();
      const double z = e.sum();
      loss -= (logits(k, target) - mx - std::log(z)) * inv_n;
      dlogits.row(k) = e / z;
      dlogits(k, target) -= 1.0;
    }
    if (grads == nullptr) continue;

    dlogits *= inv_n;
    Mat dh = Mat::Zero(h.rows(), h.cols());
    dh.middleRows(start, n) = dlogits * model.decoder.w_out.transpose();
    Mat dx = layer_norm_backward(dh, model.decoder.ln_f, cache.lnf_xhat, cache.lnf_rstd);
    for (std::size_t l = model.decoder.blocks.size(); l-- > 0;) {
      dx = block_backward(dx, model.decoder.blocks[l], model.config.heads, true,
                          adapters_for(model, l), cache.blocks[l], &grads->adapters[l]);
    }
    const auto& vis = input.segment(SegmentKind::Visual);
    if (vis.size() > 0) {
      grads->w_proj.noalias() +=
          ex.features.transpose() *
          dx.middleRows(static_cast<Eigen::Index>(vis.begin), static_cast<Eigen::Index>(vis.size()));
    }
    for (std::size_t i = 0; i < input.tokens.size(); ++i) {
      const int id = input.tokens[i];
      if (id >= kByteTokens) grads->marker_emb.row(id - kByteTokens) += dx.row(static_cast<Eigen::Index>(i));
    }
  }
  return loss;
}

TrainState init_train_state(const MultimodalModel& model) {
  TrainState s;
  s.second_moment = ModelGradients::zeros_like(model);
  return s;
}

double train_step(std::span<const TrainExample> batch, MultimodalModel& model, TrainState& state,
                  const OptimizerConfig& opt) {
  ModelGradients grads;
  const double loss = loss_and_gradients(batch, model, &grads);
  ++state.step;
  const double correction = 1.0 - std::pow(opt.decay, static_cast<double>(state.step));
  for_each_group(model, grads, state.second_moment, [&](Mat& p, const Mat& g, Mat& s) {
    s = opt.decay * s + (1.0 - opt.decay) * g.cwiseAbs2();
    p.array() -= opt.lr * g.array() / ((s.array() / correction).sqrt() + opt.eps);
  });
  state.loss_history.push_back(loss);
  return loss;
}

std::string generate(const FusionInput& input, const MultimodalModel& model, int max_new_tokens) {
  std::vector<int> produced;
  for (int step = 0; step < max_new_tokens; ++step) {
    if (input.length() + 1 + produced.size() >= static_cast<std::size_t>(model.config.max_len)) break;
    const FusionInput seq = with_answer(input, produced, model.config);
    const Mat h = decoder_hidden(embed_input(seq, model), model, nullptr);
    const RowVec logits = h.bottomRows(1) * model.decoder.w_out;
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    if (static_cast<int>(best) == kStopToken) break;
    produced.push_back(static_cast<int>(best));
  }
  return detokenize(produced, model.config.vocabulary_size);
}

std::string_view to_string(MatchMethod method) {
  switch (method) {
    case MatchMethod::Exact: return "exact";
    case MatchMethod::EditDistance: return "edit-distance";
    case MatchMethod::Fallback: return "fallback";
  }
  return "?";
}

int edit_distance(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
      }
    }
  }
  return d[n][m];
}

Prediction match_label(std::string_view generated_text) {
  Prediction p;
  p.generated_text = std::string(generated_text);
  const std::string text = lowercase_ascii(generated_text);

  std::size_t best_pos = std::string::npos;
  for (StanceLabel label : kAllLabels) {
    const std::string_view word = to_string(label);
    for (std::size_t pos = text.find(word); pos != std::string::npos;
         pos = text.find(word, pos + 1)) {
      const bool left = pos == 0 || !is_word_char(text[pos - 1]);
      const bool right = pos + word.size() == text.size() || !is_word_char(text[pos + word.size()]);
      if (left && right) {
        if (pos < best_pos) {
          best_pos = pos;
          p.matched = label;
          p.method = MatchMethod::Exact;
        }
        break;
      }
    }
  }
  if (best_pos != std::string::npos) return p;

  int best = std::numeric_limits<int>::max();
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])) != 0) ++i;
    std::size_t j = i;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j])) == 0) ++j;
    if (j > i) {
      const std::string_view token(text.data() + i, j - i);
      for (StanceLabel label : kAllLabels) {
        const int dist = edit_distance(token, to_string(label));
        if (dist < best || (dist == best && index_of(label) < index_of(p.matched))) {
          best = dist;
          p.matched = label;
          p.method = MatchMethod::EditDistance;
        }
      }
    }
    i = j;
  }
  if (p.method != MatchMethod::EditDistance) {
    p.matched = StanceLabel::None;
    p.method = MatchMethod::Fallback;
  }
  return p;
}

}  // namespace stancebench
