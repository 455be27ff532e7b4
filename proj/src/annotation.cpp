#include "stancebench/annotation.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include <json.hpp>

#include "stancebench/error.hpp"
#include "stancebench/prompt.hpp"

namespace stancebench {

using nlohmann::json;

std::string_view to_string(Round round) {
  switch (round) {
    case Round::First: return "first";
    case Round::Second: return "second";
    case Round::TieBreak: return "tie-break";
  }
  return "first";
}

std::optional<Round> parse_round(std::string_view text) {
  if (text == "first") return Round::First;
  if (text == "second") return Round::Second;
  if (text == "tie-break") return Round::TieBreak;
  return std::nullopt;
}

std::string record_to_json_line(const AnnotationRecord& r) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      r.submitted_at.time_since_epoch())
                      .count();
  json j = {{"instance_id", r.instance_id},
            {"annotator_id", r.annotator_id},
            {"label", std::string(to_string(r.label))},
            {"vision_related", r.vision_related},
            {"submitted_at_ms", ms},
            {"round", std::string(to_string(r.round))}};
  return j.dump();
}

AnnotationRecord parse_record_line(std::string_view line, std::size_t line_number) {
  try {
    const json j = json::parse(line);
    AnnotationRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.annotator_id = j.at("annotator_id").get<std::string>();
    auto label = parse_stance(j.at("label").get<std::string>());
    auto round = parse_round(j.at("round").get<std::string>());
    if (!label || !round) throw std::invalid_argument("bad label or round");
    r.label = *label;
    r.round = *round;
    r.vision_related = j.value("vision_related", false);
    r.submitted_at = Timestamp(std::chrono::milliseconds(j.value("submitted_at_ms", std::int64_t{0})));
    return r;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::MalformedLine,
                "annotation log line " + std::to_string(line_number) + ": " + e.what());
  }
}

GoldOutcome aggregate_gold(std::span<const AnnotationRecord> records) {
  std::optional<StanceLabel> first, second, tie;
  for (const auto& r : records) {
    switch (r.round) {
      case Round::First: first = r.label; break;
      case Round::Second: second = r.label; break;
      case Round::TieBreak: tie = r.label; break;
    }
  }
  if (!first || !second) {
    throw Error(ErrorKind::NeedsMoreAnnotators,
                "gold label needs two initial annotations");
  }
  if (*first == *second) return {GoldStatus::Resolved, first};
  if (!tie) return {GoldStatus::NeedsTieBreak, std::nullopt};
  if (*tie == *first || *tie == *second) return {GoldStatus::Resolved, tie};
  return {GoldStatus::Unresolved, std::nullopt};
}

double cohen_kappa(std::span<const LabelPair> pairs) {
  // 2x2 table over {Against, Favor}.
  std::array<std::array<double, 2>, 2> table{};
  double n = 0;
  for (const auto& [a, b] : pairs) {
    if (a == StanceLabel::None || b == StanceLabel::None) continue;
    table[index_of(a)][index_of(b)] += 1;
    n += 1;
  }
  if (n == 0) throw Error(ErrorKind::NoEligiblePairs, "no Favor/Against pairs");
  const double observed = (table[0][0] + table[1][1]) / n;
  double expected = 0;
  for (int k = 0; k < 2; ++k) {
    const double row = (table[k][0] + table[k][1]) / n;
    const double col = (table[0][k] + table[1][k]) / n;
    expected += row * col;
  }
  if (expected >= 1.0) {
    throw Error(ErrorKind::DegenerateMarginals, "chance agreement is 1; kappa undefined");
  }
  return (observed - expected) / (1.0 - expected);
}

// ---- store ----------------------------------------------------------------

AnnotationStore::AnnotationStore(std::vector<Instance> instances, std::filesystem::path log_path,
                                 AnnotationStoreOptions options)
    : log_path_(std::move(log_path)), options_(std::move(options)) {
  for (auto& inst : instances) {
    std::string id = inst.instance_id;
    entries_.emplace(std::move(id), Entry{std::move(inst), {}, {}});
  }
  replay();
}

void AnnotationStore::replay() {
  if (log_path_.empty() || !std::filesystem::exists(log_path_)) return;
  for (auto& r : read_record_log(log_path_)) {
    auto it = entries_.find(r.instance_id);
    if (it == entries_.end()) continue;  // instance no longer in the corpus
    it->second.records.push_back(std::move(r));
  }
}

void AnnotationStore::drop_expired(Entry& e, Timestamp now) {
  std::erase_if(e.leases, [now](const Lease& l) { return l.expiry <= now; });
}

GoldOutcome AnnotationStore::outcome_of(const Entry& e) {
  std::size_t initial = 0;
  for (const auto& r : e.records) initial += r.round != Round::TieBreak;
  if (initial < 2) return {GoldStatus::Pending, std::nullopt};
  return aggregate_gold(e.records);
}

std::optional<Round> AnnotationStore::open_round(const Entry& e) const {
  auto taken = [&](Round round) {
    for (const auto& r : e.records) {
      if (r.round == round) return true;
    }
    for (const auto& l : e.leases) {
      if (l.round == round) return true;
    }
    return false;
  };
  if (!taken(Round::First)) return Round::First;
  if (!taken(Round::Second)) return Round::Second;
  std::optional<StanceLabel> first, second;
  bool tie_recorded = false;
  for (const auto& r : e.records) {
    if (r.round == Round::First) first = r.label;
    if (r.round == Round::Second) second = r.label;
    if (r.round == Round::TieBreak) tie_recorded = true;
  }
  if (first && second && *first != *second && !tie_recorded && !taken(Round::TieBreak)) {
    return Round::TieBreak;
  }
  return std::nullopt;
}

TaskView AnnotationStore::make_view(const Entry& e, const Lease& lease) const {
  TaskView v;
  v.instance_id = e.instance.instance_id;
  v.thread_id = e.instance.thread_id;
  v.target = e.instance.target;
  v.round = lease.round;
  v.lease_expiry = lease.expiry;
  for (const auto& u : e.instance.path) v.lines.emplace_back(u.author, u.text);
  v.image_refs = e.instance.image_refs;
  if (options_.captioner) {
    for (const auto& ref : v.image_refs) {
      try {
        v.captions.push_back(get_caption(ref, *options_.captioner).caption);
      } catch (const Error&) {
        v.captions.emplace_back();
      }
    }
  }
  return v;
}

std::optional<TaskView> AnnotationStore::next_task(const std::string& annotator_id) {
  std::unique_lock lock(mutex_);
  const Timestamp now = options_.clock();
  for (auto& [id, e] : entries_) drop_expired(e, now);

  // An annotator holding a live lease gets the same task back.
  for (auto& [id, e] : entries_) {
    for (const auto& l : e.leases) {
      if (l.annotator_id == annotator_id) return make_view(e, l);
    }
  }
  for (auto& [id, e] : entries_) {
    const bool labeled_by_me = std::any_of(e.records.begin(), e.records.end(), [&](const auto& r) {
      return r.annotator_id == annotator_id;
    });
    if (labeled_by_me) continue;
    auto round = open_round(e);
    if (!round) continue;
    e.leases.push_back({annotator_id, *round, now + options_.lease_duration});
    return make_view(e, e.leases.back());
  }
  return std::nullopt;
}

AnnotationRecord AnnotationStore::submit_label(const std::string& annotator_id,
                                               const std::string& instance_id, StanceLabel label,
                                               bool vision_related) {
  std::unique_lock lock(mutex_);
  auto it = entries_.find(instance_id);
  if (it == entries_.end()) {
    throw Error(ErrorKind::UnknownInstance, "no instance '" + instance_id + "'");
  }
  Entry& e = it->second;
  for (const auto& r : e.records) {
    if (r.annotator_id == annotator_id) {
      throw Error(ErrorKind::AlreadyLabeled,
                  annotator_id + " already labeled " + instance_id + " (" +
                      std::string(to_string(r.round)) + ")");
    }
  }
  const Timestamp now = options_.clock();
  drop_expired(e, now);
  auto lease = std::find_if(e.leases.begin(), e.leases.end(),
                            [&](const Lease& l) { return l.annotator_id == annotator_id; });
  if (lease == e.leases.end()) {
    throw Error(ErrorKind::LeaseInvalid,
                "no active lease on " + instance_id + " for " + annotator_id);
  }
  AnnotationRecord record{instance_id, annotator_id, label, vision_related, now, lease->round};
  if (!log_path_.empty()) {
    std::ofstream out(log_path_, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot append to " + log_path_.string());
    out << record_to_json_line(record) << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed on " + log_path_.string());
  }
  e.leases.erase(lease);
  e.records.push_back(record);
  return record;
}

ProgressReport AnnotationStore::progress() const {
  std::shared_lock lock(mutex_);
  const Timestamp now = options_.clock();
  ProgressReport p;
  p.completed_per_round = {{Round::First, 0}, {Round::Second, 0}, {Round::TieBreak, 0}};
  p.instances = entries_.size();
  for (const auto& [id, e] : entries_) {
    for (const auto& r : e.records) {
      ++p.completed_per_round[r.round];
      ++p.per_annotator[r.annotator_id];
    }
    for (const auto& l : e.leases) p.active_leases += l.expiry > now;
    const auto outcome = outcome_of(e);
    if (outcome.status == GoldStatus::Resolved) {
      ++p.resolved;
    } else if (outcome.status == GoldStatus::Unresolved) {
      p.unresolved.push_back(id);
    } else if (outcome.status == GoldStatus::NeedsTieBreak) {
      ++p.awaiting_tie_break;
    }
  }
  return p;
}

AgreementReport AnnotationStore::agreement() const {
  std::shared_lock lock(mutex_);
  std::map<std::string, std::vector<LabelPair>> pairs;
  AgreementReport report;
  for (const auto& [id, e] : entries_) {
    auto& t = report.per_target[e.instance.target_group];
    std::optional<StanceLabel> first, second;
    for (const auto& r : e.records) {
      if (r.round == Round::First) first = r.label;
      if (r.round == Round::Second) second = r.label;
    }
    if (first && second) pairs[e.instance.target_group].emplace_back(*first, *second);
    const auto outcome = outcome_of(e);
    if (outcome.status == GoldStatus::Resolved) ++t.resolved;
    else if (outcome.status == GoldStatus::Unresolved) ++t.unresolved;
    else ++t.pending;
  }
  for (auto& [target, t] : report.per_target) {
    const auto& ps = pairs[target];
    t.counted_pairs = static_cast<std::size_t>(std::count_if(ps.begin(), ps.end(), [](const auto& p) {
      return p.first != StanceLabel::None && p.second != StanceLabel::None;
    }));
    try {
      t.kappa = cohen_kappa(ps);
    } catch (const Error& err) {
      t.kappa_error = std::string(err.name());
    }
  }
  return report;
}

std::vector<AnnotationRecord> AnnotationStore::records_for(const std::string& instance_id) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(instance_id);
  if (it == entries_.end()) return {};
  return it->second.records;
}

std::optional<GoldOutcome> AnnotationStore::gold(const std::string& instance_id) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(instance_id);
  if (it == entries_.end()) return std::nullopt;
  return outcome_of(it->second);
}

std::vector<Instance> AnnotationStore::instances_with_gold() const {
  std::vector<Instance> out;
  std::vector<AnnotationRecord> all;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, e] : entries_) {
      out.push_back(e.instance);
      all.insert(all.end(), e.records.begin(), e.records.end());
    }
  }
  merge_annotations(out, all);
  return out;
}

std::vector<Instance> AnnotationStore::instances_of_thread(const std::string& thread_id) const {
  std::shared_lock lock(mutex_);
  std::vector<Instance> out;
  for (const auto& [id, e] : entries_) {
    if (e.instance.thread_id == thread_id) out.push_back(e.instance);
  }
  return out;
}

std::size_t AnnotationStore::record_count() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& [id, e] : entries_) n += e.records.size();
  return n;
}

std::vector<AnnotationRecord> read_record_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_record_line(line, n));
  }
  return out;
}

void merge_annotations(std::vector<Instance>& instances,
                       const std::vector<AnnotationRecord>& records) {
  std::map<std::string, std::vector<AnnotationRecord>> by_instance;
  for (const auto& r : records) by_instance[r.instance_id].push_back(r);
  for (auto& inst : instances) {
    auto it = by_instance.find(inst.instance_id);
    if (it == by_instance.end()) continue;
    const auto& rs = it->second;
    const auto initial = std::count_if(rs.begin(), rs.end(),
                                       [](const auto& r) { return r.round != Round::TieBreak; });
    if (initial < 2) continue;
    const auto outcome = aggregate_gold(rs);
    if (outcome.status != GoldStatus::Resolved) continue;
    inst.gold = outcome.label;
    // Vision flag: majority among annotators who chose the gold label, ties -> related.
    int yes = 0, votes = 0;
    for (const auto& r : rs) {
      if (r.label != *outcome.label) continue;
      ++votes;
      yes += r.vision_related;
    }
    inst.vision_related = 2 * yes >= votes;
  }
}

}  // namespace stancebench
