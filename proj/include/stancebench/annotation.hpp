#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stancebench/corpus.hpp"
#include "stancebench/stance.hpp"

namespace stancebench {

class Captioner;

using Clock = std::chrono::system_clock;
using Timestamp = Clock::time_point;

enum class Round { First, Second, TieBreak };
std::string_view to_string(Round round);
std::optional<Round> parse_round(std::string_view text);

struct AnnotationRecord {
  std::string instance_id;
  std::string annotator_id;
  StanceLabel label = StanceLabel::None;
  bool vision_related = false;
  Timestamp submitted_at{};
  Round round = Round::First;
};

std::string record_to_json_line(const AnnotationRecord& record);
AnnotationRecord parse_record_line(std::string_view line, std::size_t line_number);

enum class GoldStatus {
  Resolved,        // two initial annotators agree, or a 2-of-3 majority exists
  Pending,         // fewer than two initial annotations (store bookkeeping only)
  NeedsTieBreak,   // initial annotators disagree, no tie-break yet
  Unresolved,      // all three annotators differ
};

struct GoldOutcome {
  GoldStatus status = GoldStatus::Unresolved;
  std::optional<StanceLabel> label;  // set iff status == Resolved
};

// Majority vote with third-annotator tie-break. Needs two First/Second
// records; throws NeedsMoreAnnotators otherwise.
GoldOutcome aggregate_gold(std::span<const AnnotationRecord> records);

using LabelPair = std::pair<StanceLabel, StanceLabel>;

// Cohen's kappa with per-rater marginals over Favor/Against pairs. Pairs
// holding a None label are dropped before counting.
double cohen_kappa(std::span<const LabelPair> pairs);

struct TargetAgreement {
  std::optional<double> kappa;  // unset when kappa is undefined
  std::string kappa_error;      // error name when kappa is unset
  std::size_t counted_pairs = 0;
  std::size_t resolved = 0;
  std::size_t unresolved = 0;
  std::size_t pending = 0;  // instances without a final decision yet
};

struct AgreementReport {
  std::map<std::string, TargetAgreement> per_target;
};

struct TaskView {
  std::string instance_id;
  std::string thread_id;
  std::string target;
  Round round = Round::First;
  std::vector<std::pair<std::string, std::string>> lines;  // (author, text), root first
  std::vector<std::string> image_refs;
  std::vector<std::string> captions;
  Timestamp lease_expiry{};
};

struct ProgressReport {
  std::map<Round, std::size_t> completed_per_round;
  std::size_t instances = 0;
  std::size_t resolved = 0;
  std::size_t awaiting_tie_break = 0;
  std::vector<std::string> unresolved;
  std::map<std::string, std::size_t> per_annotator;
  std::size_t active_leases = 0;
};

struct AnnotationStoreOptions {
  std::chrono::seconds lease_duration{30 * 60};
  std::function<Timestamp()> clock = [] { return Clock::now(); };
  // Optional: fills TaskView::captions.
  std::shared_ptr<Captioner> captioner;
};

// Instance queue with leases and an append-only JSONL record log. Lease grants
// and submissions are serialized; reads share the lock.
class AnnotationStore {
 public:
  AnnotationStore(std::vector<Instance> instances, std::filesystem::path log_path,
                  AnnotationStoreOptions options = {});

  std::optional<TaskView> next_task(const std::string& annotator_id);
  AnnotationRecord submit_label(const std::string& annotator_id, const std::string& instance_id,
                                StanceLabel label, bool vision_related);

  ProgressReport progress() const;
  AgreementReport agreement() const;
  std::vector<AnnotationRecord> records_for(const std::string& instance_id) const;
  std::optional<GoldOutcome> gold(const std::string& instance_id) const;
  std::vector<Instance> instances_with_gold() const;
  std::vector<Instance> instances_of_thread(const std::string& thread_id) const;
  std::size_t record_count() const;

 private:
  struct Lease {
    std::string annotator_id;
    Round round;
    Timestamp expiry;
  };
  struct Entry {
    Instance instance;
    std::vector<AnnotationRecord> records;
    std::vector<Lease> leases;
  };

  void replay();
  void drop_expired(Entry& e, Timestamp now);
  std::optional<Round> open_round(const Entry& e) const;
  TaskView make_view(const Entry& e, const Lease& lease) const;
  static GoldOutcome outcome_of(const Entry& e);

  std::map<std::string, Entry> entries_;  // ordered by instance id
  std::filesystem::path log_path_;
  AnnotationStoreOptions options_;
  mutable std::shared_mutex mutex_;
};

// Folds annotation records into instances: gold label and the majority
// vision-related flag of the deciding annotators.
std::vector<AnnotationRecord> read_record_log(const std::filesystem::path& path);
void merge_annotations(std::vector<Instance>& instances,
                       const std::vector<AnnotationRecord>& records);

}  // namespace stancebench
