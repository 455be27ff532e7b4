// Acceptance checks: one PASS/FAIL line per criterion with its tolerance and
// time budget. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stancebench/annotation.hpp"
#include "stancebench/config.hpp"
#include "stancebench/corpus.hpp"
#include "stancebench/error.hpp"
#include "stancebench/eval.hpp"
#include "stancebench/fusion.hpp"
#include "stancebench/prompt.hpp"
#include "stancebench/protocol.hpp"
#include "stancebench/synthetic.hpp"
#include "stancebench/vision.hpp"
#include "test_util.hpp"

using namespace stancebench;
using stancebench::testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::vector<LabelPair> table_pairs(int a, int b, int c, int d) {
  std::vector<LabelPair> out;
  auto push = [&](int n, StanceLabel x, StanceLabel y) {
    for (int i = 0; i < n; ++i) out.emplace_back(x, y);
  };
  push(a, StanceLabel::Against, StanceLabel::Against);
  push(b, StanceLabel::Against, StanceLabel::Favor);
  push(c, StanceLabel::Favor, StanceLabel::Against);
  push(d, StanceLabel::Favor, StanceLabel::Favor);
  return out;
}

std::vector<int> bytes(std::string_view s) {
  std::vector<int> out;
  for (unsigned char c : s) out.push_back(c);
  return out;
}

ModelConfig small_model() {
  ModelConfig c;
  c.d_model = 16;
  c.layers = 2;
  c.heads = 2;
  c.lora_rank = 4;
  c.lora_alpha = 8;
  c.max_len = 96;
  c.seed = 5;
  return c;
}

VisionConfig small_vision() {
  VisionConfig v;
  v.resolution = 8;  // 2x2 grid of 4-pixel patches
  v.patch_size = 4;
  v.width = 8;
  v.layers = 1;
  v.heads = 2;
  v.seed = 6;
  return v;
}

TrainExample image_example(const MultimodalModel& m, std::uint64_t seed, StanceLabel label) {
  Rng rng(seed);
  Image img(8, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& p : img.pixels) p = u(rng);
  TrainExample ex;
  ex.visual_prefix = bytes("img:");
  ex.features = image_features(img, m.vision_config, m.vision);
  ex.text = bytes("what does u" + std::to_string(seed) + " think?");
  ex.answer = answer_tokens(label);
  return ex;
}

// ---- criteria -----------------------------------------------------------------

Outcome metric_arithmetic() {
  Outcome o;
  const double rows[3][3] = {{62.64, 67.13, 64.89}, {65.21, 77.35, 71.28}, {79.56, 79.23, 79.40}};
  for (const auto& r : rows) {
    const double got = round_half_up2(f1_avg(r[0], r[1]));
    o.require(std::abs(got - r[2]) <= 0.005, "avg(" + fmt("%.2f", r[0]) + ", " + fmt("%.2f", r[1]) +
                                                 ") = " + fmt("%.4f", got));
  }
  ConfusionCounts c;
  const StanceLabel A = StanceLabel::Against, F = StanceLabel::Favor, N = StanceLabel::None;
  for (auto [g, p] : std::vector<std::pair<StanceLabel, StanceLabel>>{{A, A}, {A, F}, {F, F}, {F, F}, {N, A}}) {
    c.add(g, p);
  }
  const auto s = Scores::from_counts(c);
  o.require(std::abs(s.f1_against - 50.0) <= 0.005 && std::abs(s.f1_favor - 80.0) <= 0.005 &&
                std::abs(s.f1_avg - 65.0) <= 0.005,
            "worked confusion gave " + fmt("%.4f", s.f1_avg));
  if (o.pass) o.detail = "3 published rows and worked confusion within 0.005";
  return o;
}

Outcome corpus_stats() {
  Outcome o;
  const auto fixture = load_count_fixture(STANCEBENCH_TEST_DATA "/table_counts.json");
  const auto stats = compute_corpus_stats(expand_count_fixture(fixture));
  std::int64_t depth_sum = 0;
  for (const auto& row : fixture.depths) {
    const auto it = stats.per_depth.find(row.depth);
    o.require(it != stats.per_depth.end(), "missing depth " + std::to_string(row.depth));
    if (it == stats.per_depth.end()) continue;
    depth_sum += it->second.count;
    o.require(it->second.count == row.count, "depth count " + std::to_string(row.depth));
    o.require(std::abs(it->second.mean_words - row.mean_words) <= 0.01,
              "depth " + std::to_string(row.depth) + " mean words " + fmt("%.4f", it->second.mean_words));
  }
  o.require(depth_sum == 21340, "depth counts sum to " + std::to_string(depth_sum));
  for (const auto& row : fixture.targets) {
    const TargetStats& t = row.target == "total" ? stats.overall : stats.per_target.at(row.target);
    o.require(t.total == row.total, row.target + " total");
    for (auto label : kAllLabels) {
      o.require(std::abs(t.label_percent(label) - row.label_percent[index_of(label)]) <= 0.01,
                row.target + " " + std::string(to_string(label)) + " percent " +
                    fmt("%.4f", t.label_percent(label)));
    }
  }
  std::set<std::string> flagged;
  for (const auto& d : reconcile_reported_stats(stats, fixture.targets)) {
    o.require(d.field == "vision_percent", "unexpected discrepancy " + d.target + " " + d.field);
    flagged.insert(d.target);
  }
  o.require(flagged == std::set<std::string>{"tesla", "bitcoin"}, "vision discrepancy not flagged for tesla and bitcoin only");
  if (o.pass) o.detail = "percentages within 0.01, depths sum to 21340, tesla/bitcoin vision flagged";
  return o;
}

Outcome split_properties() {
  Outcome o;
  SyntheticThreadOptions opts;
  opts.threads = 200;
  opts.seed = 2024;
  const auto instances = synthetic_instances(synthetic_threads(opts), true);
  auto serialize = [&](const SplitAssignment& a) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, s] : a) j[id] = std::string(to_string(s));
    return j.dump();
  };
  const auto first = split_corpus(instances, SplitRatios{}, 77);
  const auto second = split_corpus(instances, SplitRatios{}, 77);
  o.require(serialize(first) == serialize(second), "reruns differ");

  std::map<std::string, std::map<std::string, std::set<Split>>> thread_splits;
  std::map<std::string, std::array<double, 3>> counts;
  for (const auto& inst : instances) {
    const Split s = first.at(inst.instance_id);
    thread_splits[inst.target_group][inst.thread_id].insert(s);
    counts[inst.target_group][static_cast<std::size_t>(s)] += 1;
  }
  double worst = 0;
  for (const auto& [group, threads] : thread_splits) {
    for (const auto& [tid, s] : threads) o.require(s.size() == 1, "thread " + tid + " spans splits");
    const auto& c = counts[group];
    const double n = c[0] + c[1] + c[2];
    const double want[3] = {0.70, 0.15, 0.15};
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(c[k] / n - want[k]));
  }
  o.require(worst <= 0.02, "ratio off by " + fmt("%.4f", worst));
  if (o.pass) o.detail = "max ratio deviation " + fmt("%.4f", worst) + " <= 0.02, disjoint, reruns identical";
  return o;
}

Outcome kappa() {
  Outcome o;
  o.require(std::abs(cohen_kappa(table_pairs(40, 10, 10, 40)) - 0.6) <= 1e-9, "40/10/10/40 table");
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> cell(0, 50);
  double worst = 0;
  int checked = 0;
  while (checked < 1000) {
    const double a = cell(rng), b = cell(rng), c = cell(rng), d = cell(rng);
    const double denom = (a + b) * (b + d) + (a + c) * (c + d);
    if (denom == 0) continue;
    const double oracle = 2 * (a * d - b * c) / denom;
    const double got = cohen_kappa(table_pairs(int(a), int(b), int(c), int(d)));
    worst = std::max(worst, std::abs(got - oracle));
    ++checked;
  }
  o.require(worst <= 1e-9, "max error " + fmt("%.3g", worst));
  if (o.pass) o.detail = "kappa 0.6 on worked table, max oracle error " + fmt("%.2g", worst) + " <= 1e-9";
  return o;
}

Outcome majority_vote() {
  Outcome o;
  int cases = 0;
  auto record = [](StanceLabel l, Round r) {
    AnnotationRecord x;
    x.label = l;
    x.round = r;
    return x;
  };
  for (auto a : kAllLabels) {
    for (auto b : kAllLabels) {
      std::vector<AnnotationRecord> two = {record(a, Round::First), record(b, Round::Second)};
      const auto out = aggregate_gold(two);
      o.require(a == b ? (out.status == GoldStatus::Resolved && out.label == a)
                       : (out.status == GoldStatus::NeedsTieBreak && !out.label),
                "two-annotator case");
      ++cases;
      for (auto c : kAllLabels) {
        std::vector<AnnotationRecord> three = two;
        three.push_back(record(c, Round::TieBreak));
        std::optional<StanceLabel> want;
        for (auto l : kAllLabels) {
          if ((a == l) + (b == l) + (c == l) >= 2) want = l;
        }
        const auto res = aggregate_gold(three);
        o.require(res.label == want &&
                      res.status == (want ? GoldStatus::Resolved : GoldStatus::Unresolved),
                  "three-annotator case");
        ++cases;
      }
    }
  }
  o.require(cases == 36, "case count");
  if (o.pass) o.detail = "9 + 27 label combinations match vote counting";
  return o;
}

Outcome patches_and_segments() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 6);
    const int h = p * (1 + static_cast<int>(rng() % 8));
    const int w = p * (1 + static_cast<int>(rng() % 8));
    Image img(h, w);
    for (auto& v : img.pixels) v = u(rng);
    const auto seq = patchify(img, p);
    o.require(seq.count() == static_cast<Eigen::Index>(h * w / (p * p)), "patch count");
    // Patch k, column j holds pixel (gy*p + y, gx*p + x, c).
    bool same = true;
    for (Eigen::Index k = 0; k < seq.count() && same; ++k) {
      const int gy = static_cast<int>(k) / seq.grid_cols, gx = static_cast<int>(k) % seq.grid_cols;
      for (Eigen::Index j = 0; j < seq.patches.cols(); ++j) {
        const int c = static_cast<int>(j % 3), x = static_cast<int>(j / 3) % p, y = static_cast<int>(j / 3) / p;
        if (seq.patches(k, j) != img.at(gy * p + y, gx * p + x, c)) same = false;
      }
    }
    o.require(same, "patch pixels do not map back");

    ModelConfig mc = small_model();
    mc.max_len = 512;
    Rng mrng(static_cast<std::uint64_t>(trial));
    const Mat visual = random_normal(static_cast<Eigen::Index>(rng() % 20), mc.d_model, 1.0, mrng);
    std::vector<int> pv(rng() % 10), text(1 + rng() % 40);
    for (auto& t : pv) t = static_cast<int>(rng() % 256);
    for (auto& t : text) t = static_cast<int>(rng() % 256);
    const auto in = assemble_input(pv, visual, text, mc);
    o.require(in.length() == pv.size() + static_cast<std::size_t>(visual.rows()) + text.size() + 4, "length");
    o.require(in.visual_prefix_tokens() == pv && in.text_tokens() == text && in.visual_rows() == visual,
              "segment map does not round-trip");
    o.require(in.segment(SegmentKind::Visual).size() == static_cast<std::size_t>(visual.rows()), "visual span");
  }
  if (o.pass) o.detail = "N = HW/P^2 on 100 shapes, pixel and segment maps round-trip";
  return o;
}

Outcome lora_equivalence() {
  Outcome o;
  Rng rng(12);
  double worst = 0;
  bool bit_identical = true;
  for (int draw = 0; draw < 1000; ++draw) {
    const Eigen::Index d = 4 + static_cast<Eigen::Index>(rng() % 13);
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng() % d);
    const Mat w = random_normal(d, d, 0.3, rng);
    const Mat x = random_normal(1 + static_cast<Eigen::Index>(rng() % 6), d, 1.0, rng);
    auto ad = LoraAdapter::init(d, r, 1.0 + static_cast<double>(rng() % 8), 0.3, rng);
    const Mat base = x * w;
    const Mat zero = lora_apply(w, ad, x);
    bit_identical &= std::memcmp(base.data(), zero.data(), sizeof(double) * base.size()) == 0;
    ad.b = random_normal(d, r, 0.3, rng);
    worst = std::max(worst, (lora_apply(w, ad, x) - x * (w + ad.delta())).cwiseAbs().maxCoeff());
  }
  o.require(bit_identical, "zero-initialised adapter changed x*W");
  o.require(worst < 1e-10, "dense mismatch " + fmt("%.3g", worst));

  const auto model = MultimodalModel::init(small_model(), small_vision());
  auto off = model;
  off.adapters_enabled = false;
  const auto in = example_input(image_example(model, 1, StanceLabel::Favor), model);
  const Mat a = forward(in, model), b = forward(in, off);
  o.require(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0,
            "fresh adapters change model logits");
  if (o.pass) o.detail = "zero-init bit-identical, max dense error " + fmt("%.2g", worst) + " < 1e-10 over 1000 draws";
  return o;
}

Outcome gradient_check() {
  Outcome o;
  auto model = MultimodalModel::init(small_model(), small_vision());
  o.require(model.vision_config.patch_count() == 4, "expected N = 4 patches");
  Rng rng(3);
  for (auto& ad : model.adapters) {
    ad.q.b = random_normal(ad.q.b.rows(), ad.q.b.cols(), 0.1, rng);
    ad.v.b = random_normal(ad.v.b.rows(), ad.v.b.cols(), 0.1, rng);
  }
  const std::vector<TrainExample> batch = {image_example(model, 1, StanceLabel::Against),
                                           image_example(model, 2, StanceLabel::None)};
  ModelGradients g;
  loss_and_gradients(batch, model, &g);
  auto loss = [&] { return loss_and_gradients(batch, model, nullptr); };
  double worst = 0;
  auto check = [&](Mat& param, const Mat& analytic) {
    Mat numeric(param.rows(), param.cols());
    const double eps = 1e-5;
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const double keep = param.data()[i];
      param.data()[i] = keep + eps;
      const double up = loss();
      param.data()[i] = keep - eps;
      const double down = loss();
      param.data()[i] = keep;
      numeric.data()[i] = (up - down) / (2 * eps);
    }
    const double denom = std::max({analytic.norm(), numeric.norm(), 1e-300});
    worst = std::max(worst, (analytic - numeric).norm() / denom);
  };
  for (std::size_t l = 0; l < model.adapters.size(); ++l) {
    check(model.adapters[l].q.a, g.adapters[l].dqa);
    check(model.adapters[l].q.b, g.adapters[l].dqb);
    check(model.adapters[l].v.a, g.adapters[l].dva);
    check(model.adapters[l].v.b, g.adapters[l].dvb);
  }
  check(model.vision.w_proj, g.w_proj);
  check(model.marker_emb, g.marker_emb);
  o.require(worst < 1e-4, "relative error " + fmt("%.3g", worst));
  if (o.pass) o.detail = "max relative error " + fmt("%.2g", worst) + " < 1e-4 (d_v=16, 2 layers, N=4)";
  return o;
}

Outcome frozen_conservation() {
  Outcome o;
  auto model = MultimodalModel::init(small_model(), small_vision());
  const auto frozen = model.frozen_hash();
  const auto trainable = model.trainable_hash();
  const std::vector<TrainExample> batch = {image_example(model, 1, StanceLabel::Favor),
                                           image_example(model, 2, StanceLabel::Against)};
  auto state = init_train_state(model);
  OptimizerConfig opt;
  opt.lr = 1e-2;
  for (int step = 0; step < 200; ++step) train_step(batch, model, state, opt);
  o.require(model.frozen_hash() == frozen, "frozen hash changed");
  o.require(model.trainable_hash() != trainable, "trainable parameters did not move");
  if (o.pass) o.detail = "frozen hash unchanged after 200 steps, trainable hash moved";
  return o;
}

Outcome overfit() {
  Outcome o;
  TempDir dir("overfit");
  ToyCorpusOptions toy;
  toy.targets = {"Tesla"};
  toy.instances_per_target = 8;
  write_toy_corpus(dir / "toy", toy);
  const CorpusBundle corpus = load_corpus_dir(dir / "toy");
  AppConfig cfg = load_app_config(STANCEBENCH_CONFIG_DIR "/toy.json");
  o.require(cfg.model.d_model == 64, "toy config must use d_v = 64");
  auto model = MultimodalModel::init(cfg.model, cfg.vision);
  ExampleBuilder builder(corpus, cfg.prompt, model);
  std::vector<TrainExample> examples;
  std::vector<const Instance*> instances;
  for (const auto& inst : corpus.instances) {
    examples.push_back(builder.example_for(inst));
    instances.push_back(&inst);
  }
  o.require(examples.size() == 8, "expected 8 instances");
  auto state = init_train_state(model);
  int reached = -1;
  const std::size_t batch = static_cast<std::size_t>(cfg.train.batch);
  for (int step = 1; step <= 500 && reached < 0; ++step) {
    std::vector<TrainExample> b;
    for (std::size_t k = 0; k < batch; ++k) b.push_back(examples[(step * batch + k) % examples.size()]);
    train_step(b, model, state, cfg.train.optimizer);
    if (step % 25 != 0) continue;
    int correct = 0;
    for (const auto& p : predict(model, examples, instances, cfg.train.max_new_tokens)) correct += p.matched == *p.gold;
    if (correct == static_cast<int>(examples.size())) reached = step;
  }
  o.require(reached > 0, "did not reach 100% within 500 steps");
  if (o.pass) o.detail = "8/8 correct at step " + std::to_string(reached) + " (d_v=64)";
  return o;
}

Outcome ablation_locality() {
  Outcome o;
  SyntheticThreadOptions opts;
  opts.threads = 20;
  opts.seed = 8;
  const auto instances = synthetic_instances(synthetic_threads(opts), true);
  auto lines = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string line; std::getline(ss, line);) out.push_back(line);
    return out;
  };
  // Lines of `full` that are absent from `reduced`, which must be a subsequence.
  auto removed = [&](const std::string& full, const std::string& reduced, bool& subsequence) {
    const auto a = lines(full), b = lines(reduced);
    std::vector<std::string> out;
    std::size_t j = 0;
    for (const auto& l : a) {
      if (j < b.size() && b[j] == l) ++j;
      else out.push_back(l);
    }
    subsequence = j == b.size();
    return out;
  };
  const PromptTemplateConfig full;
  const auto case_lines = lines(full.case_text);
  std::size_t checked = 0;
  for (const auto& inst : instances) {
    const std::string caption = "caption of " + inst.thread_id;
    const std::string base = build_prompt_bundle(inst, caption, full).gamma_t;
    bool subseq = false;

    PromptTemplateConfig c = full;
    c.flags.omit_caption = true;
    auto diff = removed(base, build_prompt_bundle(inst, caption, c).gamma_t, subseq);
    o.require(subseq && diff == std::vector<std::string>{"Caption: " + caption}, "caption ablation touched other lines");

    c = full;
    c.flags.omit_case = true;
    diff = removed(base, build_prompt_bundle(inst, caption, c).gamma_t, subseq);
    o.require(subseq && diff == case_lines, "case ablation touched other lines");

    c = full;
    c.flags.single_sentence = true;
    const auto parts = split_text_input(build_prompt_bundle(inst, caption, c).gamma_t, c);
    o.require(parts.conversation_lines.size() == 1 &&
                  parts.conversation_lines[0] == render_conversation(std::span(&inst.focus(), 1), false),
              "single-sentence prompt renders more than the focus line");
    ++checked;
  }
  if (o.pass) o.detail = std::to_string(checked) + " instances: each ablation removes only its own lines";
  return o;
}

Outcome protocol_determinism() {
  Outcome o;
  TempDir dir("protocol");
  ToyCorpusOptions toy;
  toy.instances_per_target = 12;
  write_toy_corpus(dir / "toy", toy);
  const CorpusBundle corpus = load_corpus_dir(dir / "toy");
  AppConfig cfg = load_app_config(STANCEBENCH_CONFIG_DIR "/toy.json");
  cfg.train.steps = 60;
  ProtocolSpec spec;
  spec.dest = "bitcoin";
  spec.seed = 13;
  auto render = [&](const ProtocolResult& r) {
    std::string s = report_to_json(r.report, &r.depth);
    for (const auto& p : r.predictions) s += prediction_to_json_line(p) + "\n";
    return s;
  };
  const auto first = render(run_protocol(spec, cfg, corpus));
  spec.threads = 2;
  const auto second = render(run_protocol(spec, cfg, corpus));
  o.require(first == second, "two identical runs differ");

  ProtocolSpec cross;
  cross.mode = ProtocolMode::CrossTarget;
  cross.source = cross.dest = "tesla";
  bool rejected = false;
  try {
    run_protocol(cross, cfg, corpus);
  } catch (const Error& e) {
    rejected = e.kind() == ErrorKind::ProtocolError;
  }
  o.require(rejected, "cross-target tesla -> tesla was not rejected");
  if (o.pass) o.detail = "reports and predictions byte-identical across runs, X -> X rejected";
  return o;
}

Outcome bootstrap() {
  Outcome o;
  std::mt19937_64 rng(21);
  std::vector<Instance> gold;
  std::vector<PredictionRecord> perfect, wrong;
  for (int i = 0; i < 100; ++i) {
    Instance inst;
    inst.instance_id = "b" + std::to_string(i);
    inst.target_group = "tesla";
    inst.gold = kAllLabels[rng() % 3];
    gold.push_back(inst);
    perfect.push_back({inst.instance_id, "", *inst.gold, inst.gold});
    wrong.push_back({inst.instance_id, "", kAllLabels[static_cast<std::size_t>((index_of(*inst.gold) + 1) % 3)], inst.gold});
  }
  const auto same = paired_bootstrap(perfect, perfect, gold, 1000, 1);
  const auto diff = paired_bootstrap(perfect, wrong, gold, 1000, 1);
  o.require(same.p_value >= 0.95, "identical systems p = " + fmt("%.3f", same.p_value));
  o.require(diff.p_value < 0.01, "perfect vs wrong p = " + fmt("%.3f", diff.p_value));
  if (o.pass) {
    o.detail = "identical p = " + fmt("%.3f", same.p_value) + " >= 0.95, perfect vs wrong p = " +
               fmt("%.3f", diff.p_value) + " < 0.01 (n=100, 1000 resamples)";
  }
  return o;
}

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"metric-arithmetic", 1, metric_arithmetic},
      {"corpus-statistics", 1, corpus_stats},
      {"thread-split", 5, split_properties},
      {"kappa", 5, kappa},
      {"majority-vote", 1, majority_vote},
      {"patches-and-segments", 5, patches_and_segments},
      {"lora-equivalence", 10, lora_equivalence},
      {"gradient-check", 60, gradient_check},
      {"frozen-conservation", 60, frozen_conservation},
      {"overfit-toy", 120, overfit},
      {"ablation-locality", 10, ablation_locality},
      {"protocol-determinism", 120, protocol_determinism},
      {"bootstrap", 10, bootstrap},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > c.budget_seconds) {
      o.pass = false;
      o.detail = "over time budget: " + o.detail;
    }
    failures += !o.pass;
    std::printf("%s %2zu %-22s %s [%.2fs / %.0fs]\n", o.pass ? "PASS" : "FAIL", i + 1, c.name.c_str(),
                o.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
