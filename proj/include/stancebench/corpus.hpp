#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stancebench/stance.hpp"

namespace stancebench {

struct Utterance {
  std::string id;
  std::string author;
  std::string text;
  std::optional<std::string> parent_id;  // absent for the post
  int depth = 1;
};

struct ConversationThread {
  std::string thread_id;
  std::string target_hint;
  Utterance post;
  std::vector<Utterance> comments;
  std::vector<std::string> image_refs;
  std::int64_t upvotes = 0;
  std::array<bool, 2> reviewer_relevance{false, false};
};

enum class Split { Train, Val, Test };
std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

enum class TargetKind { Named, PostT };

// Either a named target ("Tesla") or the post-as-target variant.
struct TargetSpec {
  TargetKind kind = TargetKind::Named;
  std::string name;

  static TargetSpec named(std::string name) { return {TargetKind::Named, std::move(name)}; }
  static TargetSpec post_target() { return {TargetKind::PostT, "Post-T"}; }
  // "tesla", "bitcoin", "post-t", ... used to group instances across threads.
  std::string group() const;
  // Resolves CLI / target_hint spellings: tesla, bitcoin, post-t, anything else named.
  static TargetSpec from_key(std::string_view key);
};

struct Instance {
  std::string instance_id;
  std::string thread_id;
  std::string target_group;
  std::string target;  // named target, or the post text for Post-T
  std::vector<Utterance> path;  // root post first, focus utterance last
  std::vector<std::string> image_refs;
  std::optional<StanceLabel> gold;
  std::optional<bool> vision_related;
  int depth = 1;
  std::optional<Split> split;

  const Utterance& focus() const { return path.back(); }
};

// Whitespace-delimited token count.
int word_count(std::string_view text);

// ---- ingestion ----------------------------------------------------------

// One thread per JSONL line. Depths are recomputed from parent links.
std::vector<ConversationThread> parse_thread_file(const std::filesystem::path& path);
ConversationThread parse_thread_line(std::string_view line, std::size_t line_number);
std::string thread_to_json_line(const ConversationThread& thread);
void write_thread_file(const std::filesystem::path& path,
                       const std::vector<ConversationThread>& threads);

// ---- preprocessing filters ------------------------------------------------

enum class DropReason { Relevance, CommentCount, Length, Language, NoImage };
std::string_view to_string(DropReason reason);

using LanguagePredicate = std::function<bool(std::string_view)>;

// Share of alphabetic code points that fall in basic Latin (U+0000..U+007F).
// Returns 0 when the text has no alphabetic characters.
double basic_latin_letter_share(std::string_view utf8);
bool looks_english(std::string_view utf8, double min_latin_share = 0.9);

struct FilterConfig {
  bool require_relevance = true;
  int min_comments = 100;
  int min_post_words = 15;
  int max_post_words = 150;
  double min_latin_share = 0.9;
  bool require_image = true;
  // Replaces the basic-Latin heuristic when set.
  LanguagePredicate language_predicate;
};

struct FilterDecision {
  bool keep = true;
  std::vector<DropReason> reasons;  // every triggered reason, in enum order
};

FilterDecision apply_preprocess_filters(const ConversationThread& thread,
                                        const FilterConfig& rules);

// ---- instances ------------------------------------------------------------

inline constexpr int kMaxDepth = 6;

std::vector<Instance> flatten_to_instances(const ConversationThread& thread,
                                           const TargetSpec& target);

std::string instance_to_json_line(const Instance& instance);
Instance parse_instance_line(std::string_view line, std::size_t line_number);
std::vector<Instance> read_instance_file(const std::filesystem::path& path);
void write_instance_file(const std::filesystem::path& path,
                         const std::vector<Instance>& instances);

// ---- statistics -----------------------------------------------------------

struct TargetStats {
  std::array<std::int64_t, 3> label_counts{};  // indexed by StanceLabel
  std::int64_t total = 0;
  std::int64_t vision_count = 0;

  // Percentages in [0, 100], unrounded.
  double label_percent(StanceLabel label) const;
  double vision_percent() const;
};

struct DepthStats {
  std::int64_t count = 0;
  double mean_words = 0.0;  // mean word count of the focus utterance
};

struct CorpusStats {
  std::map<std::string, TargetStats> per_target;
  TargetStats overall;
  std::map<int, DepthStats> per_depth;
  std::int64_t total = 0;
};

CorpusStats compute_corpus_stats(const std::vector<Instance>& instances);

// A row of a published label-distribution table, for reconciliation.
struct ReportedTargetRow {
  std::string target;
  std::array<std::int64_t, 3> label_counts{};
  std::array<double, 3> label_percent{};
  std::int64_t total = 0;
  std::int64_t vision_count = 0;
  double vision_percent = 0.0;
};

struct StatsDiscrepancy {
  std::string target;
  std::string field;  // e.g. "vision_percent", "against_percent", "total"
  double reported = 0.0;
  double computed = 0.0;
};

// Compares reported percentages against count/total. A percentage field is
// flagged when it differs from the recomputed value by more than `tolerance`
// percentage points.
std::vector<StatsDiscrepancy> reconcile_reported_stats(
    const CorpusStats& stats, const std::vector<ReportedTargetRow>& reported,
    double tolerance = 0.01);

// ---- splitting ------------------------------------------------------------

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

// instance_id -> split. Ordered so serialization is stable.
using SplitAssignment = std::map<std::string, Split>;

// Thread-level split, stratified per target group. Deterministic in `seed`.
SplitAssignment split_corpus(const std::vector<Instance>& instances,
                             const SplitRatios& ratios, std::uint64_t seed);

void apply_split(std::vector<Instance>& instances, const SplitAssignment& assignment);

}  // namespace stancebench
