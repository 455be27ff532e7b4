#include "stancebench/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "stancebench/error.hpp"
#include "stancebench/vision.hpp"

namespace stancebench {

using json = nlohmann::json;

namespace {

const std::vector<std::string> kWords = {"price", "launch", "today", "market", "chart", "news",
                                         "think", "maybe", "really", "again", "people", "sold",
                                         "bought", "year", "week", "model", "hold", "crash"};

std::string random_sentence(std::mt19937_64& rng, int min_words, int max_words) {
  std::uniform_int_distribution<int> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += kWords[pick(rng)];
  }
  return out;
}

std::string repeat_word(std::int64_t n) {
  std::string out;
  out.reserve(static_cast<std::size_t>(n) * 2);
  for (std::int64_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += 'w';
  }
  return out;
}

const char* const kFavorLines[] = {
    "I love {t}, best thing that happened this year",
    "{t} is brilliant and I am all in",
    "great move, {t} keeps winning",
};
const char* const kAgainstLines[] = {
    "I hate {t}, a total waste of money",
    "{t} is a disaster, stay away",
    "awful idea, {t} keeps failing",
};
const char* const kNoneLines[] = {
    "what time is the game tonight",
    "anyone tried the new pizza place downtown",
    "my cat just knocked over a plant",
};

std::string fill_target(std::string line, const std::string& target) {
  const auto pos = line.find("{t}");
  if (pos != std::string::npos) line.replace(pos, 3, target);
  return line;
}

}  // namespace

std::vector<ConversationThread> synthetic_threads(const SyntheticThreadOptions& o) {
  if (o.targets.empty() || o.min_comments < 0 || o.max_comments < o.min_comments) {
    throw Error(ErrorKind::ConfigInvalid, "synthetic threads: bad options");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<int> n_comments(o.min_comments, o.max_comments);
  std::uniform_int_distribution<std::size_t> pick_target(0, o.targets.size() - 1);
  std::vector<ConversationThread> out;
  for (int t = 0; t < o.threads; ++t) {
    ConversationThread th;
    th.thread_id = "s" + std::to_string(t);
    th.target_hint = o.targets[pick_target(rng)];
    th.post = {"p", "op" + std::to_string(t), th.target_hint + " " + random_sentence(rng, 15, 40),
               std::nullopt, 1};
    th.image_refs = {th.thread_id + ".png"};
    th.reviewer_relevance = {true, true};
    std::vector<const Utterance*> open = {&th.post};
    const int n = n_comments(rng);
    th.comments.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
      std::uniform_int_distribution<std::size_t> pick_parent(0, open.size() - 1);
      const Utterance* parent = open[pick_parent(rng)];
      Utterance u{"c" + std::to_string(c), "u" + std::to_string(rng() % 50),
                  random_sentence(rng, 3, 30), parent->id, parent->depth + 1};
      th.comments.push_back(std::move(u));
      if (th.comments.back().depth < kMaxDepth) open.push_back(&th.comments.back());
    }
    out.push_back(std::move(th));
  }
  return out;
}

std::vector<Instance> synthetic_instances(const std::vector<ConversationThread>& threads,
                                          bool include_post_target) {
  std::vector<Instance> out;
  for (const auto& th : threads) {
    for (auto& inst : flatten_to_instances(th, TargetSpec::from_key(th.target_hint))) {
      out.push_back(std::move(inst));
    }
    if (include_post_target) {
      for (auto& inst : flatten_to_instances(th, TargetSpec::post_target())) {
        inst.instance_id += "#post-t";
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

CountFixture load_count_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  CountFixture f;
  try {
    const json j = json::parse(in);
    for (const auto& r : j.at("targets")) {
      ReportedTargetRow row;
      row.target = r.at("target").get<std::string>();
      row.label_counts = {r.at("against").get<std::int64_t>(), r.at("favor").get<std::int64_t>(),
                          r.at("none").get<std::int64_t>()};
      row.label_percent = {r.at("against_percent").get<double>(),
                           r.at("favor_percent").get<double>(), r.at("none_percent").get<double>()};
      row.total = r.at("total").get<std::int64_t>();
      row.vision_count = r.at("vision").get<std::int64_t>();
      row.vision_percent = r.at("vision_percent").get<double>();
      f.targets.push_back(row);
    }
    for (const auto& d : j.at("depths")) {
      f.depths.push_back({d.at("depth").get<int>(), d.at("count").get<std::int64_t>(),
                          d.at("mean_words").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedLine, path.string() + ": " + e.what());
  }
  return f;
}

std::vector<Instance> expand_count_fixture(const CountFixture& fixture) {
  std::vector<DepthRow> depths = fixture.depths;
  std::sort(depths.begin(), depths.end(),
            [](const DepthRow& a, const DepthRow& b) { return a.depth < b.depth; });
  // Focus word counts per depth, spreading the rounded total evenly.
  std::vector<std::pair<int, std::int64_t>> slots;  // (depth, words), ascending depth
  for (const auto& d : depths) {
    const auto total_words = static_cast<std::int64_t>(std::llround(d.mean_words * d.count));
    const std::int64_t base = d.count > 0 ? total_words / d.count : 0;
    const std::int64_t extra = d.count > 0 ? total_words % d.count : 0;
    for (std::int64_t k = 0; k < d.count; ++k) slots.emplace_back(d.depth, base + (k < extra ? 1 : 0));
  }

  std::vector<Instance> out;
  std::size_t next = 0;
  for (const auto& row : fixture.targets) {
    if (row.target == "total") continue;
    const TargetSpec spec = TargetSpec::from_key(row.target);
    std::int64_t placed = 0;
    for (StanceLabel label : kAllLabels) {
      for (std::int64_t k = 0; k < row.label_counts[static_cast<std::size_t>(index_of(label))]; ++k) {
        if (next >= slots.size()) {
          throw Error(ErrorKind::ConfigInvalid, "count fixture: depth rows hold fewer instances than targets");
        }
        const auto [depth, words] = slots[next++];
        if (spec.kind == TargetKind::PostT && depth < 2) {
          throw Error(ErrorKind::ConfigInvalid, "count fixture: Post-T instance dealt depth 1");
        }
        Instance inst;
        inst.instance_id = "fx-" + spec.group() + "-" + std::to_string(placed);
        inst.thread_id = inst.instance_id;
        inst.target_group = spec.group();
        inst.target = spec.kind == TargetKind::PostT ? "post" : spec.name;
        for (int d = 1; d <= depth; ++d) {
          Utterance u{"u" + std::to_string(d), "a" + std::to_string(d),
                      d == depth ? repeat_word(words) : "x", std::nullopt, d};
          if (d > 1) u.parent_id = "u" + std::to_string(d - 1);
          inst.path.push_back(std::move(u));
        }
        inst.depth = depth;
        inst.gold = label;
        inst.vision_related = placed < row.vision_count;
        out.push_back(std::move(inst));
        ++placed;
      }
    }
  }
  if (next != slots.size()) {
    throw Error(ErrorKind::ConfigInvalid, "count fixture: depth rows hold more instances than targets");
  }
  return out;
}

std::vector<Instance> write_toy_corpus(const std::filesystem::path& dir, const ToyCorpusOptions& o) {
  namespace fs = std::filesystem;
  if (o.instances_per_target < 3 || o.image_size <= 0) {
    throw Error(ErrorKind::ConfigInvalid, "toy corpus: need >= 3 instances per target");
  }
  fs::create_directories(dir / "images");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> noise(-0.15, 0.15);

  std::vector<ConversationThread> threads;
  std::vector<Instance> instances;
  std::ofstream captions(dir / "captions.jsonl", std::ios::binary);
  if (!captions) throw Error(ErrorKind::IoError, "cannot write " + (dir / "captions.jsonl").string());

  for (const auto& target : o.targets) {
    const TargetSpec spec = TargetSpec::from_key(target);
    for (int i = 0; i < o.instances_per_target; ++i) {
      const StanceLabel label = kAllLabels[static_cast<std::size_t>(i % 3)];
      const std::string tid = "toy-" + spec.group() + "-" + std::to_string(i);
      const std::string image_ref = tid + ".png";

      // Against: red, favor: green, none: blue.
      Image img(o.image_size, o.image_size);
      const int channel = index_of(label);
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
          for (int c = 0; c < Image::kChannels; ++c) {
            img.at(y, x, c) = std::clamp((c == channel ? 0.8 : 0.2) + noise(rng), 0.0, 1.0);
          }
        }
      }
      save_png(dir / "images" / image_ref, img);
      static const char* const kColour[] = {"red", "green", "blue"};
      captions << json{{"image_ref", image_ref},
                       {"caption", std::string("a mostly ") + kColour[channel] + " picture"}}
                      .dump()
               << '\n';

      const char* const* lines = label == StanceLabel::Favor     ? kFavorLines
                                 : label == StanceLabel::Against ? kAgainstLines
                                                                 : kNoneLines;
      ConversationThread th;
      th.thread_id = tid;
      th.target_hint = spec.name;
      th.post = {"p", "op" + std::to_string(i), "news about " + spec.name + " number " + std::to_string(i),
                 std::nullopt, 1};
      th.comments.push_back({"c1", "user" + std::to_string(i),
                             fill_target(lines[static_cast<std::size_t>(i / 3) % 3], spec.name), "p", 2});
      th.image_refs = {image_ref};
      th.reviewer_relevance = {true, true};
      for (auto& inst : flatten_to_instances(th, spec)) {
        if (inst.depth != 2) continue;
        inst.gold = label;
        inst.vision_related = true;
        instances.push_back(std::move(inst));
      }
      threads.push_back(std::move(th));
    }
  }
  apply_split(instances, split_corpus(instances, SplitRatios{}, o.seed));
  write_thread_file(dir / "threads.jsonl", threads);
  write_instance_file(dir / "instances.jsonl", instances);
  return instances;
}

}  // namespace stancebench
