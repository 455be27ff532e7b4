#include "stancebench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "stancebench/error.hpp"

namespace stancebench {

using json = nlohmann::json;

namespace {

[[noreturn]] void malformed(std::size_t line_number, const std::string& what) {
  throw Error(ErrorKind::MalformedLine,
              "predictions line " + std::to_string(line_number) + ": " + what);
}

std::string list_ids(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) out += ", ";
    out += ids[i];
  }
  if (ids.size() > shown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

// Predictions paired with their gold label, in gold order.
struct Paired {
  std::vector<const Instance*> instances;
  std::vector<StanceLabel> gold;
  std::vector<StanceLabel> predicted;
};

Paired pair_up(std::span<const PredictionRecord> predictions, std::span<const Instance> gold) {
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  std::vector<std::string> duplicate, extra, missing, unlabeled;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.instance_id, &p).second) duplicate.push_back(p.instance_id);
  }
  Paired out;
  std::set<std::string> seen;
  for (const auto& inst : gold) {
    if (!inst.gold) {
      unlabeled.push_back(inst.instance_id);
      continue;
    }
    seen.insert(inst.instance_id);
    auto it = by_id.find(inst.instance_id);
    if (it == by_id.end()) {
      missing.push_back(inst.instance_id);
      continue;
    }
    out.instances.push_back(&inst);
    out.gold.push_back(*inst.gold);
    out.predicted.push_back(it->second->matched);
  }
  for (const auto& p : predictions) {
    if (!seen.contains(p.instance_id)) extra.push_back(p.instance_id);
  }
  std::string msg;
  auto note = [&msg](const char* what, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    if (!msg.empty()) msg += "; ";
    msg += std::string(what) + ": " + list_ids(ids);
  };
  note("missing predictions", missing);
  note("predictions without gold", extra);
  note("duplicate predictions", duplicate);
  note("gold instances without a label", unlabeled);
  if (!msg.empty()) throw Error(ErrorKind::PredictionGoldMismatch, msg);
  return out;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", round_half_up2(v));
  return buf;
}

json scores_json(const Scores& s) {
  json j;
  j["f1_against"] = round_half_up2(s.f1_against);
  j["f1_favor"] = round_half_up2(s.f1_favor);
  j["f1_none"] = round_half_up2(s.f1_none);
  j["f1_avg"] = round_half_up2(s.f1_avg);
  j["n"] = s.n;
  json c = json::object();
  for (StanceLabel l : kAllLabels) {
    const auto i = static_cast<std::size_t>(index_of(l));
    c[std::string(to_string(l))] = {{"tp", s.counts.tp[i]}, {"fp", s.counts.fp[i]},
                                    {"fn", s.counts.fn[i]}};
  }
  j["confusion"] = c;
  return j;
}

std::string pad(std::string s, std::size_t width, bool left) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

// ---- predictions file -------------------------------------------------------

std::string prediction_to_json_line(const PredictionRecord& r) {
  json j;
  j["instance_id"] = r.instance_id;
  j["generated_text"] = r.generated_text;
  j["matched"] = std::string(to_string(r.matched));
  j["gold"] = r.gold ? json(std::string(to_string(*r.gold))) : json(nullptr);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

PredictionRecord parse_prediction_line(std::string_view line, std::size_t line_number) {
  PredictionRecord r;
  try {
    const json j = json::parse(line);
    r.instance_id = j.at("instance_id").get<std::string>();
    r.generated_text = j.value("generated_text", std::string());
    auto matched = parse_stance(j.at("matched").get<std::string>());
    if (!matched) malformed(line_number, "unknown matched label");
    r.matched = *matched;
    if (j.contains("gold") && !j["gold"].is_null()) {
      auto gold = parse_stance(j["gold"].get<std::string>());
      if (!gold) malformed(line_number, "unknown gold label");
      r.gold = gold;
    }
  } catch (const json::exception& e) {
    malformed(line_number, std::string("schema violation: ") + e.what());
  }
  return r;
}

std::vector<PredictionRecord> read_prediction_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_prediction_line(line, n));
  }
  return out;
}

void write_prediction_file(const std::filesystem::path& path,
                           const std::vector<PredictionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& r : records) out << prediction_to_json_line(r) << '\n';
}

// ---- metrics ----------------------------------------------------------------

void ConfusionCounts::add(StanceLabel gold, StanceLabel predicted) {
  const auto g = static_cast<std::size_t>(index_of(gold));
  const auto p = static_cast<std::size_t>(index_of(predicted));
  if (g == p) {
    ++tp[g];
  } else {
    ++fn[g];
    ++fp[p];
  }
}

std::int64_t ConfusionCounts::total() const {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < 3; ++i) n += tp[i] + fp[i];
  return n;
}

double f1_class(const ConfusionCounts& counts, StanceLabel label) {
  const auto i = static_cast<std::size_t>(index_of(label));
  const double denom = 2.0 * counts.tp[i] + counts.fp[i] + counts.fn[i];
  if (denom == 0.0) return 0.0;
  return 100.0 * 2.0 * counts.tp[i] / denom;
}

double f1_avg(double f1_against, double f1_favor) { return (f1_against + f1_favor) / 2.0; }

double round_half_up2(double value) { return std::floor(value * 100.0 + 0.5 + 1e-9) / 100.0; }

Scores Scores::from_counts(const ConfusionCounts& counts) {
  Scores s;
  s.counts = counts;
  s.f1_against = f1_class(counts, StanceLabel::Against);
  s.f1_favor = f1_class(counts, StanceLabel::Favor);
  s.f1_none = f1_class(counts, StanceLabel::None);
  s.f1_avg = stancebench::f1_avg(s.f1_against, s.f1_favor);
  s.n = counts.total();
  return s;
}

EvalReport evaluate(std::span<const PredictionRecord> predictions,
                    std::span<const Instance> gold_instances) {
  const Paired paired = pair_up(predictions, gold_instances);
  ConfusionCounts overall;
  std::map<std::string, ConfusionCounts> per_target;
  for (std::size_t i = 0; i < paired.gold.size(); ++i) {
    overall.add(paired.gold[i], paired.predicted[i]);
    per_target[paired.instances[i]->target_group].add(paired.gold[i], paired.predicted[i]);
  }
  EvalReport report;
  report.overall = Scores::from_counts(overall);
  for (const auto& [group, counts] : per_target) {
    report.per_target[group] = Scores::from_counts(counts);
  }
  return report;
}

DepthBucketReport depth_bucket_report(std::span<const PredictionRecord> predictions,
                                      std::span<const Instance> gold_instances, TargetKind kind) {
  DepthBucketReport report;
  report.kind = kind;
  if (kind == TargetKind::Named) {
    report.buckets = {{"1", 1, 1, {}}, {"2-4", 2, 4, {}}, {"5-6", 5, 6, {}}};
  } else {
    report.buckets = {{"2", 2, 2, {}}, {"3-4", 3, 4, {}}, {"5-6", 5, 6, {}}};
  }
  const int lowest = report.buckets.front().min_depth;
  for (const auto& inst : gold_instances) {
    if (inst.depth < lowest || inst.depth > kMaxDepth) {
      throw Error(ErrorKind::DepthOutOfRange,
                  "instance '" + inst.instance_id + "' has depth " + std::to_string(inst.depth) +
                      ", expected " + std::to_string(lowest) + "-" + std::to_string(kMaxDepth));
    }
  }
  const Paired paired = pair_up(predictions, gold_instances);
  std::vector<ConfusionCounts> counts(report.buckets.size());
  for (std::size_t i = 0; i < paired.gold.size(); ++i) {
    const int depth = paired.instances[i]->depth;
    for (std::size_t b = 0; b < report.buckets.size(); ++b) {
      if (depth >= report.buckets[b].min_depth && depth <= report.buckets[b].max_depth) {
        counts[b].add(paired.gold[i], paired.predicted[i]);
        break;
      }
    }
  }
  for (std::size_t b = 0; b < report.buckets.size(); ++b) {
    report.buckets[b].scores = Scores::from_counts(counts[b]);
  }
  return report;
}

SignificanceResult paired_bootstrap(std::span<const PredictionRecord> a,
                                    std::span<const PredictionRecord> b,
                                    std::span<const Instance> gold_instances, int resamples,
                                    std::uint64_t seed) {
  if (resamples < 100) {
    throw Error(ErrorKind::ConfigInvalid,
                "bootstrap needs at least 100 resamples, got " + std::to_string(resamples));
  }
  // Canonical order so the result does not depend on input ordering.
  std::vector<Instance> gold(gold_instances.begin(), gold_instances.end());
  std::sort(gold.begin(), gold.end(),
            [](const Instance& x, const Instance& y) { return x.instance_id < y.instance_id; });
  const Paired pa = pair_up(a, gold);
  const Paired pb = pair_up(b, gold);
  const std::size_t n = pa.gold.size();
  if (n == 0) throw Error(ErrorKind::PredictionGoldMismatch, "no labeled instances to resample");

  auto score = [&](const std::vector<std::size_t>* idx, const Paired& p) {
    ConfusionCounts c;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = idx != nullptr ? (*idx)[k] : k;
      c.add(p.gold[i], p.predicted[i]);
    }
    return Scores::from_counts(c).f1_avg;
  };

  SignificanceResult result;
  result.resamples = resamples;
  result.seed = seed;
  result.observed_delta = score(nullptr, pa) - score(nullptr, pb);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  int not_better = 0;
  for (int r = 0; r < resamples; ++r) {
    for (auto& i : idx) i = pick(rng);
    if (score(&idx, pa) <= score(&idx, pb)) ++not_better;
  }
  result.p_value = static_cast<double>(not_better) / resamples;
  return result;
}

// ---- rendering --------------------------------------------------------------

std::string report_to_json(const EvalReport& report, const DepthBucketReport* depth) {
  json j;
  j["overall"] = scores_json(report.overall);
  json targets = json::object();
  for (const auto& [group, scores] : report.per_target) targets[group] = scores_json(scores);
  j["per_target"] = targets;
  if (depth != nullptr) {
    json d;
    d["target_kind"] = depth->kind == TargetKind::Named ? "named" : "post-t";
    json buckets = json::array();
    for (const auto& b : depth->buckets) {
      json jb = scores_json(b.scores);
      jb["bucket"] = b.name;
      jb["min_depth"] = b.min_depth;
      jb["max_depth"] = b.max_depth;
      buckets.push_back(jb);
    }
    d["buckets"] = buckets;
    j["depth_buckets"] = d;
  }
  j["manifest"] = report.manifest;
  return j.dump(2) + "\n";
}

std::string render_report_table(const EvalReport& report, const DepthBucketReport* depth) {
  std::ostringstream out;
  auto row = [&out](const std::string& name, const Scores& s) {
    out << pad(name, 10, true) << pad(fixed2(s.f1_against), 12, false)
        << pad(fixed2(s.f1_favor), 10, false) << pad(fixed2(s.f1_avg), 10, false)
        << pad(fixed2(s.f1_none), 10, false) << pad(std::to_string(s.n), 8, false) << '\n';
  };
  auto header = [&out](const std::string& first) {
    out << pad(first, 10, true) << pad("F1-against", 12, false) << pad("F1-favor", 10, false)
        << pad("F1-avg", 10, false) << pad("F1-none", 10, false) << pad("n", 8, false) << '\n';
  };
  header("target");
  for (const auto& [group, scores] : report.per_target) row(group, scores);
  row("all", report.overall);
  if (depth != nullptr) {
    out << '\n';
    header("depth");
    for (const auto& b : depth->buckets) row(b.name, b.scores);
  }
  return out.str();
}

std::string significance_to_json(const SignificanceResult& r) {
  json j;
  j["observed_delta"] = round_half_up2(r.observed_delta);
  j["p_value"] = r.p_value;
  j["resamples"] = r.resamples;
  j["seed"] = r.seed;
  return j.dump(2) + "\n";
}

}  // namespace stancebench
