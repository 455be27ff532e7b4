#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stancebench/corpus.hpp"
#include "stancebench/fusion.hpp"
#include "stancebench/stance.hpp"

namespace stancebench {

struct PredictionRecord {
  std::string instance_id;
  std::string generated_text;
  StanceLabel matched = StanceLabel::None;
  std::optional<StanceLabel> gold;
};

std::string prediction_to_json_line(const PredictionRecord& record);
PredictionRecord parse_prediction_line(std::string_view line, std::size_t line_number);
std::vector<PredictionRecord> read_prediction_file(const std::filesystem::path& path);
void write_prediction_file(const std::filesystem::path& path,
                           const std::vector<PredictionRecord>& records);

struct ConfusionCounts {
  std::array<std::int64_t, 3> tp{};
  std::array<std::int64_t, 3> fp{};
  std::array<std::int64_t, 3> fn{};

  void add(StanceLabel gold, StanceLabel predicted);
  std::int64_t total() const;  // number of (gold, predicted) pairs added
};

// Percent in [0, 100]; 0 when the class never occurs and is never predicted.
double f1_class(const ConfusionCounts& counts, StanceLabel label);
double f1_avg(double f1_against, double f1_favor);

// Half-up to 2 decimals; the small guard keeps values like 64.885 from
// rounding down through binary representation error.
double round_half_up2(double value);

struct Scores {
  ConfusionCounts counts;
  double f1_against = 0.0;
  double f1_favor = 0.0;
  double f1_none = 0.0;
  double f1_avg = 0.0;
  std::int64_t n = 0;

  static Scores from_counts(const ConfusionCounts& counts);
};

struct EvalReport {
  Scores overall;
  std::map<std::string, Scores> per_target;  // keyed by target group
  std::map<std::string, std::string> manifest;
};

// Predictions and gold must cover exactly the same instance ids.
EvalReport evaluate(std::span<const PredictionRecord> predictions,
                    std::span<const Instance> gold_instances);

struct DepthBucket {
  std::string name;  // "1", "2-4", "5-6", ...
  int min_depth = 0;
  int max_depth = 0;
  Scores scores;
};

struct DepthBucketReport {
  TargetKind kind = TargetKind::Named;
  std::vector<DepthBucket> buckets;
};

DepthBucketReport depth_bucket_report(std::span<const PredictionRecord> predictions,
                                      std::span<const Instance> gold_instances, TargetKind kind);

struct SignificanceResult {
  double observed_delta = 0.0;  // F1-avg(A) - F1-avg(B)
  double p_value = 1.0;
  int resamples = 0;
  std::uint64_t seed = 0;
};

// p = share of resamples with F1-avg(A) <= F1-avg(B), testing "A better than B".
SignificanceResult paired_bootstrap(std::span<const PredictionRecord> a,
                                    std::span<const PredictionRecord> b,
                                    std::span<const Instance> gold_instances, int resamples,
                                    std::uint64_t seed);

std::string report_to_json(const EvalReport& report, const DepthBucketReport* depth);
std::string render_report_table(const EvalReport& report, const DepthBucketReport* depth);
std::string significance_to_json(const SignificanceResult& result);

}  // namespace stancebench
