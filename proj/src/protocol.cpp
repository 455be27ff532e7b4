#include "stancebench/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <thread>

#include "stancebench/error.hpp"
#include "stancebench/hashing.hpp"
#include "stancebench/vision.hpp"

namespace stancebench {

namespace {

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<const Instance*> select(const std::vector<Instance>& instances, const std::string& group,
                                    bool all_splits, Split split) {
  std::vector<const Instance*> out;
  for (const auto& inst : instances) {
    if (inst.target_group != group || !inst.gold) continue;
    if (!all_splits && inst.split != split) continue;
    out.push_back(&inst);
  }
  return out;
}

}  // namespace

CorpusBundle load_corpus_dir(const std::filesystem::path& dir) {
  CorpusBundle c;
  c.instances = read_instance_file(dir / "instances.jsonl");
  c.image_root = dir / "images";
  if (std::filesystem::exists(dir / "captions.jsonl")) {
    c.captions = StubCaptioner::load_captions(dir / "captions.jsonl");
  }
  return c;
}

std::string corpus_hash(const std::vector<Instance>& instances) {
  Sha256 h;
  for (const auto& inst : instances) {
    h.update(instance_to_json_line(inst));
    h.update("\n");
  }
  return h.hex_digest();
}

ExampleBuilder::ExampleBuilder(const CorpusBundle& corpus, const PromptTemplateConfig& prompt,
                               const MultimodalModel& model)
    : corpus_(corpus),
      prompt_(prompt),
      model_(model),
      captioner_(std::make_unique<StubCaptioner>(corpus.image_root, corpus.captions)),
      p_v_tokens_(tokenize(prompt.p_v_text).ids) {}

PromptBundle ExampleBuilder::prompt_for(const Instance& instance) {
  const std::string caption =
      prompt_.flags.omit_caption ? std::string() : instance_caption(instance, captioner_.get());
  return build_prompt_bundle(instance, caption, prompt_);
}

Mat ExampleBuilder::features_for(const Instance& instance) {
  const auto& vc = model_.vision_config;
  const Eigen::Index width = vc.width;
  if (instance.image_refs.empty()) return Mat(0, width);
  const std::string& ref = instance.image_refs.front();
  auto it = feature_cache_.find(ref);
  if (it == feature_cache_.end()) {
    const std::filesystem::path file = captioner_->resolve(ref);
    if (!std::filesystem::is_regular_file(file)) {
      throw Error(ErrorKind::ImageMissing, "image '" + ref + "' not found under " +
                                               corpus_.image_root.string());
    }
    const Image image = resize_bilinear(load_image(file), vc.resolution, vc.resolution);
    it = feature_cache_.emplace(ref, image_features(image, vc, model_.vision)).first;
  }
  return it->second;
}

TrainExample ExampleBuilder::example_for(const Instance& instance) {
  TrainExample ex;
  ex.visual_prefix = p_v_tokens_;
  ex.features = features_for(instance);
  ex.text = prompt_for(instance).gamma_t_tokens.ids;
  if (instance.gold) ex.answer = answer_tokens(*instance.gold);
  return ex;
}

TrainState train_model(MultimodalModel& model, const std::vector<TrainExample>& examples,
                       const TrainConfig& config, std::uint64_t seed) {
  TrainState state = init_train_state(model);
  if (examples.empty() || config.steps == 0) return state;
  Rng rng(seed ^ 0x7a11b47c4ULL);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  const auto batch_size = std::min<std::size_t>(static_cast<std::size_t>(config.batch), examples.size());
  std::vector<TrainExample> batch;
  for (int step = 0; step < config.steps; ++step) {
    batch.clear();
    for (std::size_t k = 0; k < batch_size; ++k) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(examples[order[cursor++]]);
    }
    train_step(batch, model, state, config.optimizer);
  }
  return state;
}

std::vector<PredictionRecord> predict(const MultimodalModel& model,
                                      const std::vector<TrainExample>& examples,
                                      const std::vector<const Instance*>& instances,
                                      int max_new_tokens, int threads) {
  if (examples.size() != instances.size()) {
    throw Error(ErrorKind::DimensionError, "predict: examples and instances differ in count");
  }
  std::vector<PredictionRecord> out(examples.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < examples.size(); i += stride) {
      const std::string text = generate(example_input(examples[i], model), model, max_new_tokens);
      const Prediction p = match_label(text);
      out[i] = {instances[i]->instance_id, text, p.matched, instances[i]->gold};
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, threads));
  if (n_threads == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        work(t, n_threads);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string_view to_string(ProtocolMode mode) {
  return mode == ProtocolMode::InTarget ? "in-target" : "cross-target";
}

ProtocolResult run_protocol(const ProtocolSpec& spec, const AppConfig& base,
                            const CorpusBundle& corpus) {
  if (spec.mode == ProtocolMode::CrossTarget && spec.source == spec.dest) {
    throw Error(ErrorKind::ProtocolError,
                "cross-target run needs distinct source and destination, got '" + spec.dest +
                    "' for both");
  }
  AppConfig config = base;
  config.model.seed = spec.seed;
  config.vision.seed = spec.seed;
  config.prompt.flags.omit_caption |= spec.ablation.omit_caption;
  config.prompt.flags.omit_case |= spec.ablation.omit_case;
  config.prompt.flags.single_sentence |= spec.ablation.single_sentence;
  config.validate();

  const std::string& train_group = spec.mode == ProtocolMode::InTarget ? spec.dest : spec.source;
  const auto train_set = select(corpus.instances, train_group, false, Split::Train);
  const bool test_all =
      spec.mode == ProtocolMode::CrossTarget && config.protocol.cross_target_full_dest;
  const auto test_set = select(corpus.instances, spec.dest, test_all, Split::Test);
  if (train_set.empty()) {
    throw Error(ErrorKind::ProtocolError, "no labeled train-split instances for '" + train_group + "'");
  }
  if (test_set.empty()) {
    throw Error(ErrorKind::ProtocolError, "no labeled test instances for '" + spec.dest + "'");
  }

  MultimodalModel model = MultimodalModel::init(config.model, config.vision);
  const std::string frozen_before = model.frozen_hash();
  ExampleBuilder builder(corpus, config.prompt, model);
  Sha256 prompt_hash;
  auto build = [&](const std::vector<const Instance*>& set) {
    std::vector<TrainExample> out;
    out.reserve(set.size());
    for (const Instance* inst : set) {
      out.push_back(builder.example_for(*inst));
      prompt_hash.update(inst->instance_id);
      prompt_hash.update("\t");
      prompt_hash.update(detokenize(out.back().text));
      prompt_hash.update("\n");
    }
    return out;
  };
  const std::vector<TrainExample> train_examples = build(train_set);
  const std::vector<TrainExample> test_examples = build(test_set);

  TrainState state = train_model(model, train_examples, config.train, spec.seed);
  if (model.frozen_hash() != frozen_before) {
    throw Error(ErrorKind::NumericalError, "frozen weights changed during training");
  }

  ProtocolResult result;
  result.predictions = predict(model, test_examples, test_set, config.train.max_new_tokens, spec.threads);
  std::vector<Instance> gold;
  gold.reserve(test_set.size());
  for (const Instance* inst : test_set) gold.push_back(*inst);
  result.report = evaluate(result.predictions, gold);
  const TargetKind kind = TargetSpec::from_key(spec.dest).kind;
  result.depth = depth_bucket_report(result.predictions, gold, kind);
  result.loss_history = state.loss_history;
  result.prompt_hash = prompt_hash.hex_digest();

  auto& m = result.report.manifest;
  m["mode"] = std::string(to_string(spec.mode));
  m["source"] = spec.mode == ProtocolMode::CrossTarget ? spec.source : spec.dest;
  m["dest"] = spec.dest;
  m["seed"] = std::to_string(spec.seed);
  m["config_hash"] = config_hash(config);
  m["corpus_hash"] = corpus_hash(corpus.instances);
  m["prompt_hash"] = result.prompt_hash;
  m["frozen_hash"] = frozen_before;
  m["ablation"] = std::string(config.prompt.flags.omit_caption ? "no-caption " : "") +
                  (config.prompt.flags.omit_case ? "no-cot " : "") +
                  (config.prompt.flags.single_sentence ? "single-sentence" : "");
  while (!m["ablation"].empty() && m["ablation"].back() == ' ') m["ablation"].pop_back();
  m["train_instances"] = std::to_string(train_set.size());
  m["test_instances"] = std::to_string(test_set.size());
  m["steps"] = std::to_string(config.train.steps);
  m["final_loss"] = state.loss_history.empty() ? "" : format_double(state.loss_history.back());
  return result;
}

}  // namespace stancebench
