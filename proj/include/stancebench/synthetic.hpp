#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stancebench/corpus.hpp"

namespace stancebench {

// Random reply trees over named targets. Each thread carries between
// `min_comments` and `max_comments` comments with depths up to 6.
struct SyntheticThreadOptions {
  int threads = 200;
  int min_comments = 3;
  int max_comments = 40;
  std::vector<std::string> targets = {"Tesla", "Bitcoin"};
  std::uint64_t seed = 0;
};

std::vector<ConversationThread> synthetic_threads(const SyntheticThreadOptions& options);

// Named-target instances of every thread plus Post-T instances when requested.
std::vector<Instance> synthetic_instances(const std::vector<ConversationThread>& threads,
                                          bool include_post_target);

// Published per-target label/vision counts and per-depth counts with mean
// focus-utterance word counts.
struct DepthRow {
  int depth = 1;
  std::int64_t count = 0;
  double mean_words = 0.0;
};

struct CountFixture {
  std::vector<ReportedTargetRow> targets;  // rows for each target plus a "total" row
  std::vector<DepthRow> depths;
};

CountFixture load_count_fixture(const std::filesystem::path& path);

// One instance per counted item. Labels and vision flags follow the target
// rows; depths are dealt out in ascending order across targets in row order,
// so Post-T (listed last) receives the deepest instances. Focus word counts
// reproduce each depth's mean to two decimals.
std::vector<Instance> expand_count_fixture(const CountFixture& fixture);

// Small multimodal corpus on disk: images/, threads.jsonl, instances.jsonl
// (gold + split), captions.jsonl. Labels correlate with wording and image
// colour so a small model can fit them.
struct ToyCorpusOptions {
  std::vector<std::string> targets = {"Tesla", "Bitcoin"};
  int instances_per_target = 8;
  int image_size = 16;
  std::uint64_t seed = 0;
};

std::vector<Instance> write_toy_corpus(const std::filesystem::path& dir,
                                       const ToyCorpusOptions& options);

}  // namespace stancebench
