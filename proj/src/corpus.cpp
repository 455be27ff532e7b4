#include "stancebench/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "stancebench/error.hpp"
#include "stancebench/hashing.hpp"

namespace stancebench {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  return std::nullopt;
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::Relevance: return "Relevance";
    case DropReason::CommentCount: return "CommentCount";
    case DropReason::Length: return "Length";
    case DropReason::Language: return "Language";
    case DropReason::NoImage: return "NoImage";
  }
  return "Unknown";
}

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string TargetSpec::group() const {
  if (kind == TargetKind::PostT) return "post-t";
  return lowercase(name);
}

TargetSpec TargetSpec::from_key(std::string_view key) {
  const std::string k = lowercase(key);
  if (k == "post-t" || k == "post_t" || k == "postt") return post_target();
  if (k == "tesla") return named("Tesla");
  if (k == "bitcoin") return named("Bitcoin");
  return named(std::string(key));
}

int word_count(std::string_view text) {
  int count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

// ---- ingestion ------------------------------------------------------------

namespace {

[[noreturn]] void malformed(std::size_t line_number, const std::string& what) {
  throw Error(ErrorKind::MalformedLine,
              "line " + std::to_string(line_number) + ": " + what);
}

// Recomputes depths from parent links; validates tree shape.
void resolve_depths(const std::string& thread_id, std::vector<Utterance>& utterances) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < utterances.size(); ++i) index.emplace(utterances[i].id, i);

  for (const auto& u : utterances) {
    if (u.parent_id && !index.contains(*u.parent_id)) {
      throw Error(ErrorKind::DanglingParent,
                  "utterance '" + u.id + "' references missing parent '" + *u.parent_id + "'");
    }
  }

  std::vector<int> depth(utterances.size(), 0);
  for (std::size_t start = 0; start < utterances.size(); ++start) {
    if (depth[start] != 0) continue;
    std::vector<std::size_t> chain;
    std::size_t cur = start;
    while (depth[cur] == 0) {
      chain.push_back(cur);
      if (chain.size() > utterances.size()) {
        throw Error(ErrorKind::CycleDetected, "thread '" + thread_id + "' contains a reply cycle");
      }
      const auto& parent = utterances[cur].parent_id;
      if (!parent) break;
      cur = index.at(*parent);
    }
    int base = 0;
    if (utterances[chain.back()].parent_id) {
      base = depth[cur];  // reached an already-resolved ancestor
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth[*it] = ++base;
  }
  for (std::size_t i = 0; i < utterances.size(); ++i) utterances[i].depth = depth[i];
}

}  // namespace

ConversationThread parse_thread_line(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    malformed(line_number, std::string("invalid JSON: ") + e.what());
  }
  ConversationThread t;
  std::vector<Utterance> utterances;
  try {
    t.thread_id = j.at("thread_id").get<std::string>();
    t.target_hint = j.value("target_hint", std::string{});
    t.upvotes = j.value("upvotes", std::int64_t{0});
    const auto& rel = j.at("reviewer_relevance");
    if (!rel.is_array() || rel.size() != 2) malformed(line_number, "reviewer_relevance must hold two booleans");
    t.reviewer_relevance = {rel[0].get<bool>(), rel[1].get<bool>()};
    t.image_refs = j.value("image_refs", std::vector<std::string>{});
    for (const auto& ju : j.at("utterances")) {
      Utterance u;
      u.id = ju.at("id").get<std::string>();
      u.author = ju.at("author").get<std::string>();
      u.text = ju.at("text").get<std::string>();
      if (ju.contains("parent_id") && !ju.at("parent_id").is_null()) {
        u.parent_id = ju.at("parent_id").get<std::string>();
      }
      if (word_count(u.text) < 1) malformed(line_number, "utterance '" + u.id + "' has no words");
      utterances.push_back(std::move(u));
    }
  } catch (const json::exception& e) {
    malformed(line_number, std::string("schema violation: ") + e.what());
  }

  if (utterances.empty()) malformed(line_number, "thread has no utterances");
  std::set<std::string> seen;
  std::size_t roots = 0;
  for (const auto& u : utterances) {
    if (!seen.insert(u.id).second) malformed(line_number, "duplicate utterance id '" + u.id + "'");
    if (!u.parent_id) ++roots;
  }
  if (roots > 1) malformed(line_number, "thread '" + t.thread_id + "' has more than one post");

  resolve_depths(t.thread_id, utterances);
  if (roots == 0) {
    throw Error(ErrorKind::CycleDetected, "thread '" + t.thread_id + "' has no root post");
  }

  auto post_it = std::find_if(utterances.begin(), utterances.end(),
                              [](const Utterance& u) { return !u.parent_id; });
  t.post = *post_it;
  for (auto& u : utterances) {
    if (u.parent_id) t.comments.push_back(std::move(u));
  }
  return t;
}

std::vector<ConversationThread> parse_thread_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<ConversationThread> threads;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    threads.push_back(parse_thread_line(line, line_number));
  }
  return threads;
}

namespace {

json utterance_json(const Utterance& u) {
  json ju = {{"id", u.id}, {"author", u.author}, {"text", u.text}};
  ju["parent_id"] = u.parent_id ? json(*u.parent_id) : json(nullptr);
  return ju;
}

}  // namespace

std::string thread_to_json_line(const ConversationThread& t) {
  json j;
  j["thread_id"] = t.thread_id;
  j["target_hint"] = t.target_hint;
  j["upvotes"] = t.upvotes;
  j["reviewer_relevance"] = {t.reviewer_relevance[0], t.reviewer_relevance[1]};
  j["image_refs"] = t.image_refs;
  json us = json::array();
  us.push_back(utterance_json(t.post));
  for (const auto& c : t.comments) us.push_back(utterance_json(c));
  j["utterances"] = std::move(us);
  return j.dump();
}

void write_thread_file(const std::filesystem::path& path,
                       const std::vector<ConversationThread>& threads) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& t : threads) out << thread_to_json_line(t) << '\n';
}

// ---- filters --------------------------------------------------------------

namespace {

// Decodes one UTF-8 code point; invalid bytes decode as U+FFFD.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i++]);
  if (b0 < 0x80) return b0;
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) { extra = 1; cp = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { extra = 2; cp = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { extra = 3; cp = b0 & 0x07; }
  else return 0xFFFD;
  for (int k = 0; k < extra; ++k) {
    if (i >= s.size() || (static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) return 0xFFFD;
    cp = (cp << 6) | (static_cast<unsigned char>(s[i++]) & 0x3F);
  }
  return cp;
}

// Non-ASCII code points counted as letters: everything outside the common
// punctuation, symbol, emoji and formatting blocks.
bool is_non_ascii_letter(char32_t cp) {
  if (cp < 0x80) return false;
  if (cp <= 0xBF) return false;                    // Latin-1 punctuation and signs
  if (cp == 0xD7 || cp == 0xF7) return false;      // multiplication, division
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, arrows, math, shapes
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xFE00 && cp <= 0xFE0F) return false;  // variation selectors
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;  // fullwidth punctuation
  if (cp == 0xFFFD) return false;
  if (cp >= 0x1F000) return false;                 // emoji and pictographs
  return true;
}

}  // namespace

double basic_latin_letter_share(std::string_view utf8) {
  std::size_t latin = 0;
  std::size_t letters = 0;
  for (std::size_t i = 0; i < utf8.size();) {
    const char32_t cp = next_code_point(utf8, i);
    if (cp < 0x80) {
      if (std::isalpha(static_cast<int>(cp))) {
        ++latin;
        ++letters;
      }
    } else if (is_non_ascii_letter(cp)) {
      ++letters;
    }
  }
  if (letters == 0) return 0.0;
  return static_cast<double>(latin) / static_cast<double>(letters);
}

bool looks_english(std::string_view utf8, double min_latin_share) {
  return basic_latin_letter_share(utf8) >= min_latin_share;
}

FilterDecision apply_preprocess_filters(const ConversationThread& thread,
                                        const FilterConfig& rules) {
  FilterDecision d;
  auto drop = [&](DropReason r) {
    d.keep = false;
    d.reasons.push_back(r);
  };
  if (rules.require_relevance &&
      !(thread.reviewer_relevance[0] && thread.reviewer_relevance[1])) {
    drop(DropReason::Relevance);
  }
  if (static_cast<long long>(thread.comments.size()) < rules.min_comments) {
    drop(DropReason::CommentCount);
  }
  const int words = word_count(thread.post.text);
  if (words < rules.min_post_words || words > rules.max_post_words) drop(DropReason::Length);
  const bool english = rules.language_predicate
                           ? rules.language_predicate(thread.post.text)
                           : looks_english(thread.post.text, rules.min_latin_share);
  if (!english) drop(DropReason::Language);
  if (rules.require_image && thread.image_refs.empty()) drop(DropReason::NoImage);
  return d;
}

// ---- flattening ------------------------------------------------------------

std::vector<Instance> flatten_to_instances(const ConversationThread& thread,
                                           const TargetSpec& target) {
  std::unordered_map<std::string, const Utterance*> by_id;
  by_id.emplace(thread.post.id, &thread.post);
  for (const auto& c : thread.comments) by_id.emplace(c.id, &c);

  const int min_depth = target.kind == TargetKind::PostT ? 2 : 1;
  std::vector<Instance> out;
  auto emit = [&](const Utterance& focus) {
    if (focus.depth < min_depth || focus.depth > kMaxDepth) return;
    Instance inst;
    inst.instance_id = thread.thread_id + ":" + focus.id;
    inst.thread_id = thread.thread_id;
    inst.target_group = target.group();
    inst.target = target.kind == TargetKind::PostT ? thread.post.text : target.name;
    const Utterance* cur = &focus;
    while (cur != nullptr) {
      inst.path.push_back(*cur);
      cur = cur->parent_id ? by_id.at(*cur->parent_id) : nullptr;
    }
    std::reverse(inst.path.begin(), inst.path.end());
    inst.image_refs = thread.image_refs;
    inst.depth = static_cast<int>(inst.path.size());
    out.push_back(std::move(inst));
  };
  emit(thread.post);
  for (const auto& c : thread.comments) emit(c);
  return out;
}

std::string instance_to_json_line(const Instance& inst) {
  json j;
  j["instance_id"] = inst.instance_id;
  j["thread_id"] = inst.thread_id;
  j["target_group"] = inst.target_group;
  j["target"] = inst.target;
  json ids = json::array(), texts = json::array(), authors = json::array();
  for (const auto& u : inst.path) {
    ids.push_back(u.id);
    texts.push_back(u.text);
    authors.push_back(u.author);
  }
  j["path"] = std::move(ids);
  j["text_path"] = std::move(texts);
  j["author_path"] = std::move(authors);
  j["image_refs"] = inst.image_refs;
  j["gold"] = inst.gold ? json(std::string(to_string(*inst.gold))) : json(nullptr);
  j["vision_related"] = inst.vision_related ? json(*inst.vision_related) : json(nullptr);
  j["depth"] = inst.depth;
  j["split"] = inst.split ? json(std::string(to_string(*inst.split))) : json(nullptr);
  return j.dump();
}

Instance parse_instance_line(std::string_view line, std::size_t line_number) {
  Instance inst;
  try {
    const json j = json::parse(line);
    inst.instance_id = j.at("instance_id").get<std::string>();
    inst.target = j.at("target").get<std::string>();
    const auto ids = j.at("path").get<std::vector<std::string>>();
    const auto texts = j.at("text_path").get<std::vector<std::string>>();
    const auto authors = j.at("author_path").get<std::vector<std::string>>();
    if (ids.empty() || ids.size() != texts.size() || ids.size() != authors.size()) {
      malformed(line_number, "path, text_path and author_path must be non-empty and equal length");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Utterance u{ids[i], authors[i], texts[i], std::nullopt, static_cast<int>(i) + 1};
      if (i > 0) u.parent_id = ids[i - 1];
      inst.path.push_back(std::move(u));
    }
    const auto colon = inst.instance_id.rfind(':');
    inst.thread_id = j.value("thread_id", colon == std::string::npos
                                              ? inst.instance_id
                                              : inst.instance_id.substr(0, colon));
    inst.target_group = j.value("target_group", lowercase(inst.target));
    inst.image_refs = j.value("image_refs", std::vector<std::string>{});
    if (j.contains("gold") && !j["gold"].is_null()) {
      auto label = parse_stance(j["gold"].get<std::string>());
      if (!label) malformed(line_number, "unknown gold label");
      inst.gold = label;
    }
    if (j.contains("vision_related") && !j["vision_related"].is_null()) {
      inst.vision_related = j["vision_related"].get<bool>();
    }
    inst.depth = j.value("depth", static_cast<int>(ids.size()));
    if (inst.depth != static_cast<int>(ids.size())) malformed(line_number, "depth != path length");
    if (j.contains("split") && !j["split"].is_null()) {
      auto s = parse_split(j["split"].get<std::string>());
      if (!s) malformed(line_number, "unknown split");
      inst.split = s;
    }
  } catch (const json::exception& e) {
    malformed(line_number, std::string("schema violation: ") + e.what());
  }
  return inst;
}

std::vector<Instance> read_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<Instance> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_instance_line(line, n));
  }
  return out;
}

void write_instance_file(const std::filesystem::path& path,
                         const std::vector<Instance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& inst : instances) out << instance_to_json_line(inst) << '\n';
}

// ---- stats ----------------------------------------------------------------

double TargetStats::label_percent(StanceLabel label) const {
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(label_counts[index_of(label)]) / static_cast<double>(total);
}

double TargetStats::vision_percent() const {
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(vision_count) / static_cast<double>(total);
}

CorpusStats compute_corpus_stats(const std::vector<Instance>& instances) {
  if (instances.empty()) throw Error(ErrorKind::EmptyCorpus, "no instances");
  CorpusStats s;
  std::map<int, std::int64_t> words;
  for (const auto& inst : instances) {
    if (!inst.gold) {
      throw Error(ErrorKind::EmptyCorpus, "instance '" + inst.instance_id + "' has no gold label");
    }
    for (TargetStats* t : {&s.per_target[inst.target_group], &s.overall}) {
      ++t->label_counts[index_of(*inst.gold)];
      ++t->total;
      if (inst.vision_related.value_or(false)) ++t->vision_count;
    }
    ++s.per_depth[inst.depth].count;
    words[inst.depth] += word_count(inst.focus().text);
    ++s.total;
  }
  for (auto& [depth, d] : s.per_depth) {
    d.mean_words = static_cast<double>(words[depth]) / static_cast<double>(d.count);
  }
  return s;
}

std::vector<StatsDiscrepancy> reconcile_reported_stats(
    const CorpusStats& stats, const std::vector<ReportedTargetRow>& reported, double tolerance) {
  std::vector<StatsDiscrepancy> out;
  for (const auto& row : reported) {
    const std::string key = lowercase(row.target);
    const TargetStats* t = nullptr;
    if (key == "total") {
      t = &stats.overall;
    } else if (auto it = stats.per_target.find(key); it != stats.per_target.end()) {
      t = &it->second;
    }
    if (t == nullptr) continue;
    auto check = [&](const char* field, double rep, double comp, double tol) {
      if (std::abs(rep - comp) > tol) out.push_back({row.target, field, rep, comp});
    };
    check("total", static_cast<double>(row.total), static_cast<double>(t->total), 0.0);
    for (auto label : kAllLabels) {
      const std::string name = std::string(to_string(label));
      check((name + "_count").c_str(), static_cast<double>(row.label_counts[index_of(label)]),
            static_cast<double>(t->label_counts[index_of(label)]), 0.0);
      // Reported values carry two decimals, so compare against the rounded figure.
      const double comp = std::floor(t->label_percent(label) * 100.0 + 0.5 + 1e-9) / 100.0;
      check((name + "_percent").c_str(), row.label_percent[index_of(label)], comp, tolerance + 1e-9);
    }
    check("vision_count", static_cast<double>(row.vision_count),
          static_cast<double>(t->vision_count), 0.0);
    const double vis = std::floor(t->vision_percent() * 100.0 + 0.5 + 1e-9) / 100.0;
    check("vision_percent", row.vision_percent, vis, tolerance + 1e-9);
  }
  return out;
}

// ---- split ----------------------------------------------------------------

SplitAssignment split_corpus(const std::vector<Instance>& instances, const SplitRatios& ratios,
                             std::uint64_t seed) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.val < 0 || ratios.test < 0) {
    throw Error(ErrorKind::ConfigInvalid, "split ratios must be non-negative and sum to 1");
  }
  const std::array<double, 3> ratio = {ratios.train, ratios.val, ratios.test};

  // target group -> thread id -> instance ids (ordered maps give a canonical
  // starting order independent of input order).
  std::map<std::string, std::map<std::string, std::vector<std::string>>> groups;
  for (const auto& inst : instances) {
    groups[inst.target_group][inst.thread_id].push_back(inst.instance_id);
  }

  SplitAssignment out;
  for (const auto& [group, threads] : groups) {
    if (threads.size() < 3) {
      throw Error(ErrorKind::InsufficientThreads,
                  "target '" + group + "' has " + std::to_string(threads.size()) +
                      " thread(s); at least 3 are required");
    }
    std::vector<const std::pair<const std::string, std::vector<std::string>>*> order;
    for (const auto& kv : threads) order.push_back(&kv);
    std::mt19937_64 rng(seed ^ fnv1a64(group));
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t total = 0;
    for (const auto* t : order) total += t->second.size();

    // Greedy: each thread goes to the split furthest below its quota.
    std::array<std::vector<std::size_t>, 3> members;
    std::array<double, 3> filled{0, 0, 0};
    for (std::size_t i = 0; i < order.size(); ++i) {
      std::size_t best = 0;
      double best_deficit = -1e300;
      for (std::size_t s = 0; s < 3; ++s) {
        const double deficit = ratio[s] * static_cast<double>(total) - filled[s];
        if (deficit > best_deficit) {
          best_deficit = deficit;
          best = s;
        }
      }
      members[best].push_back(i);
      filled[best] += static_cast<double>(order[i]->second.size());
    }
    // Every split with a positive ratio gets at least one thread.
    for (std::size_t s = 0; s < 3; ++s) {
      if (!members[s].empty() || ratio[s] == 0.0) continue;
      std::size_t donor = 0;
      for (std::size_t k = 1; k < 3; ++k) {
        if (members[k].size() > members[donor].size()) donor = k;
      }
      auto smallest = std::min_element(
          members[donor].begin(), members[donor].end(), [&](std::size_t a, std::size_t b) {
            return order[a]->second.size() < order[b]->second.size();
          });
      members[s].push_back(*smallest);
      members[donor].erase(smallest);
    }
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t i : members[s]) {
        for (const auto& id : order[i]->second) out[id] = static_cast<Split>(s);
      }
    }
  }
  return out;
}

void apply_split(std::vector<Instance>& instances, const SplitAssignment& assignment) {
  for (auto& inst : instances) {
    if (auto it = assignment.find(inst.instance_id); it != assignment.end()) inst.split = it->second;
  }
}

}  // namespace stancebench
