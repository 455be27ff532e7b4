#include "stancebench/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stancebench/annotation.hpp"
#include "stancebench/annotation_server.hpp"
#include "stancebench/config.hpp"
#include "stancebench/corpus.hpp"
#include "stancebench/error.hpp"
#include "stancebench/eval.hpp"
#include "stancebench/hashing.hpp"
#include "stancebench/protocol.hpp"
#include "stancebench/synthetic.hpp"

#ifndef STANCEBENCH_VERSION
#define STANCEBENCH_VERSION "0.0.0"
#endif

namespace stancebench {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path data_dir(const std::string& given) {
  if (!given.empty()) return given;
  if (const char* env = std::getenv("STANCEBENCH_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  throw UsageError("--in is required when STANCEBENCH_DATA_DIR is not set");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << content;
}

AppConfig config_or_default(const std::string& path) {
  return path.empty() ? AppConfig{} : load_app_config(path);
}

AblationFlags parse_ablations(const std::vector<std::string>& names) {
  AblationFlags f;
  for (const auto& n : names) {
    if (n == "no-caption") f.omit_caption = true;
    else if (n == "no-cot") f.omit_case = true;
    else if (n == "single-sentence") f.single_sentence = true;
  }
  return f;
}

TargetSpec resolve_target(const std::string& key, const std::string& custom_name) {
  if (key == "custom") {
    if (custom_name.empty()) throw UsageError("--target custom needs --target-name");
    return TargetSpec::named(custom_name);
  }
  return TargetSpec::from_key(key);
}

RunManifest start_manifest(std::string command, std::uint64_t seed) {
  RunManifest m;
  m.command = std::move(command);
  m.seed = seed;
  m.started_at = utc_timestamp();
  m.tool_version = STANCEBENCH_VERSION;
  return m;
}

void finish_manifest(const fs::path& path, RunManifest m) {
  m.finished_at = utc_timestamp();
  write_manifest(path, m);
}

json target_stats_json(const TargetStats& s) {
  json j;
  for (StanceLabel l : kAllLabels) {
    const std::string name(to_string(l));
    j[name] = s.label_counts[static_cast<std::size_t>(index_of(l))];
    j[name + "_percent"] = round_half_up2(s.label_percent(l));
  }
  j["total"] = s.total;
  j["vision"] = s.vision_count;
  j["vision_percent"] = round_half_up2(s.vision_percent());
  return j;
}

std::string fixed2(double v) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2) << round_half_up2(v);
  return o.str();
}

// ---- commands -------------------------------------------------------------

struct IngestArgs {
  std::string in, out, filters = "default", target, target_name, images;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  RunManifest manifest = start_manifest("ingest", 0);
  FilterConfig filters;
  if (a.filters != "default") {
    AppConfig c = parse_app_config(json{{"filters", json::parse(read_file(a.filters))}}.dump());
    filters = c.filters;
    manifest.config_hash = sha256_hex(read_file(a.filters));
  } else {
    manifest.config_hash = sha256_hex(std::string("default"));
  }
  const auto threads = parse_thread_file(a.in);
  const fs::path out_dir = a.out;
  fs::create_directories(out_dir);
  const fs::path image_src = a.images.empty() ? fs::path(a.in).parent_path() / "images" : fs::path(a.images);

  std::vector<ConversationThread> kept;
  std::vector<Instance> instances;
  std::map<std::string, std::size_t> reason_counts;
  for (DropReason r : {DropReason::Relevance, DropReason::CommentCount, DropReason::Length,
                       DropReason::Language, DropReason::NoImage}) {
    reason_counts[std::string(to_string(r))] = 0;
  }
  for (const auto& th : threads) {
    const FilterDecision d = apply_preprocess_filters(th, filters);
    if (!d.keep) {
      for (DropReason r : d.reasons) ++reason_counts[std::string(to_string(r))];
      continue;
    }
    const TargetSpec spec = a.target.empty() ? TargetSpec::from_key(th.target_hint)
                                             : resolve_target(a.target, a.target_name);
    for (auto& inst : flatten_to_instances(th, spec)) instances.push_back(std::move(inst));
    kept.push_back(th);
  }
  write_thread_file(out_dir / "threads.jsonl", kept);
  write_instance_file(out_dir / "instances.jsonl", instances);
  std::size_t copied = 0;
  if (fs::is_directory(image_src)) {
    fs::create_directories(out_dir / "images");
    for (const auto& th : kept) {
      for (const auto& ref : th.image_refs) {
        const fs::path src = image_src / ref;
        if (!fs::is_regular_file(src)) continue;
        fs::create_directories((out_dir / "images" / ref).parent_path());
        fs::copy_file(src, out_dir / "images" / ref, fs::copy_options::overwrite_existing);
        ++copied;
      }
    }
  }

  json summary;
  summary["threads"] = threads.size();
  summary["kept"] = kept.size();
  summary["dropped"] = threads.size() - kept.size();
  summary["drop_reasons"] = reason_counts;
  summary["instances"] = instances.size();
  summary["images_copied"] = copied;
  write_file(out_dir / "ingest_summary.json", summary.dump(2) + "\n");

  out << "kept " << kept.size() << " of " << threads.size() << " threads, dropped "
      << threads.size() - kept.size() << "\n";
  for (const auto& [reason, n] : reason_counts) out << "  " << reason << ": " << n << "\n";
  out << "instances: " << instances.size() << "\n";

  manifest.corpus_hash = corpus_hash(instances);
  finish_manifest(out_dir / "manifest.json", manifest);
  return 0;
}

struct SplitArgs {
  std::string in, out, annotations, config;
  std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& a, std::ostream& out) {
  const AppConfig config = config_or_default(a.config);
  const fs::path in_dir = data_dir(a.in);
  const fs::path out_dir = a.out.empty() ? in_dir : fs::path(a.out);
  RunManifest manifest = start_manifest("split", a.seed);
  manifest.config_hash = config_hash(config);

  std::vector<Instance> instances = read_instance_file(in_dir / "instances.jsonl");
  if (!a.annotations.empty()) merge_annotations(instances, read_record_log(a.annotations));
  const SplitAssignment assignment = split_corpus(instances, config.split, a.seed);
  apply_split(instances, assignment);
  fs::create_directories(out_dir);
  write_instance_file(out_dir / "instances.jsonl", instances);

  json j = json::object();
  std::map<std::string, std::array<std::size_t, 3>> counts;
  for (const auto& [id, split] : assignment) j[id] = std::string(to_string(split));
  for (const auto& inst : instances) {
    if (inst.split) ++counts[inst.target_group][static_cast<std::size_t>(*inst.split)];
  }
  write_file(out_dir / "split.json", j.dump(2) + "\n");
  for (const auto& [group, c] : counts) {
    out << group << ": train " << c[0] << ", val " << c[1] << ", test " << c[2] << "\n";
  }
  manifest.corpus_hash = corpus_hash(instances);
  finish_manifest(out_dir / "split_manifest.json", manifest);
  return 0;
}

struct StatsArgs {
  std::string in, out, reported;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  const fs::path in_dir = data_dir(a.in);
  const fs::path file = fs::is_directory(in_dir) ? in_dir / "instances.jsonl" : in_dir;
  const auto instances = read_instance_file(file);
  const CorpusStats stats = compute_corpus_stats(instances);

  json j;
  json targets = json::object();
  for (const auto& [group, s] : stats.per_target) targets[group] = target_stats_json(s);
  j["per_target"] = targets;
  j["overall"] = target_stats_json(stats.overall);
  json depths = json::object();
  for (const auto& [depth, d] : stats.per_depth) {
    depths[std::to_string(depth)] = {{"count", d.count}, {"mean_words", round_half_up2(d.mean_words)}};
  }
  j["per_depth"] = depths;
  j["total"] = stats.total;

  out << "target      against    favor     none    total   vision\n";
  auto row = [&out](const std::string& name, const TargetStats& s) {
    out << std::left << std::setw(10) << name << std::right;
    for (StanceLabel l : kAllLabels) out << std::setw(9) << fixed2(s.label_percent(l));
    out << std::setw(9) << s.total << std::setw(9) << fixed2(s.vision_percent()) << "\n";
  };
  for (const auto& [group, s] : stats.per_target) row(group, s);
  row("total", stats.overall);
  out << "\ndepth     count  mean_words\n";
  for (const auto& [depth, d] : stats.per_depth) {
    out << std::left << std::setw(6) << depth << std::right << std::setw(9) << d.count
        << std::setw(12) << fixed2(d.mean_words) << "\n";
  }

  if (!a.reported.empty()) {
    const CountFixture fixture = load_count_fixture(a.reported);
    json disc = json::array();
    for (const auto& d : reconcile_reported_stats(stats, fixture.targets)) {
      disc.push_back({{"target", d.target}, {"field", d.field}, {"reported", d.reported},
                      {"computed", round_half_up2(d.computed)}});
      out << "discrepancy: " << d.target << " " << d.field << " reported " << fixed2(d.reported)
          << " computed " << fixed2(d.computed) << "\n";
    }
    j["discrepancies"] = disc;
  }
  if (!a.out.empty()) write_file(a.out, j.dump(2) + "\n");
  return 0;
}

struct ServeArgs {
  std::string in, log, ui_dir, host = "127.0.0.1";
  int port = 8080;
  int lease_minutes = 30;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  const fs::path in_dir = data_dir(a.in);
  auto instances = read_instance_file(in_dir / "instances.jsonl");
  AnnotationStoreOptions opts;
  opts.lease_duration = std::chrono::minutes(a.lease_minutes);
  std::map<std::string, std::string> captions;
  if (fs::exists(in_dir / "captions.jsonl")) captions = StubCaptioner::load_captions(in_dir / "captions.jsonl");
  opts.captioner = std::make_shared<StubCaptioner>(in_dir / "images", captions);
  AnnotationStore store(std::move(instances), a.log.empty() ? in_dir / "annotations.jsonl" : fs::path(a.log),
                        opts);
  AnnotationServer server(store, {in_dir / "images", a.ui_dir});
  const int port = server.bind(a.host, a.port);
  out << "listening on http://" << a.host << ":" << port << std::endl;
  server.serve();
  return 0;
}

struct PromptArgs {
  std::string in, out, config, target;
  std::vector<std::string> ablation;
};

int cmd_prompts(const PromptArgs& a, std::ostream& out) {
  AppConfig config = config_or_default(a.config);
  const AblationFlags flags = parse_ablations(a.ablation);
  config.prompt.flags.omit_caption |= flags.omit_caption;
  config.prompt.flags.omit_case |= flags.omit_case;
  config.prompt.flags.single_sentence |= flags.single_sentence;
  const fs::path in_dir = data_dir(a.in);
  const CorpusBundle corpus = load_corpus_dir(in_dir);
  StubCaptioner captioner(corpus.image_root, corpus.captions);
  RunManifest manifest = start_manifest("prompts", 0);
  manifest.config_hash = config_hash(config);
  manifest.corpus_hash = corpus_hash(corpus.instances);

  const std::string group = a.target.empty() ? "" : TargetSpec::from_key(a.target).group();
  std::ostringstream lines;
  std::size_t n = 0;
  for (const auto& inst : corpus.instances) {
    if (!group.empty() && inst.target_group != group) continue;
    const std::string caption =
        config.prompt.flags.omit_caption ? std::string() : instance_caption(inst, &captioner);
    const PromptBundle b = build_prompt_bundle(inst, caption, config.prompt);
    json j = {{"instance_id", inst.instance_id}, {"p_t", b.p_t},       {"delta", b.delta},
              {"caption", b.caption},            {"gamma_t", b.gamma_t}, {"tokens", b.gamma_t_tokens.ids.size()}};
    lines << j.dump(-1, ' ', false, json::error_handler_t::replace) << "\n";
    ++n;
  }
  const fs::path out_file = a.out.empty() ? in_dir / "prompts.jsonl" : fs::path(a.out);
  write_file(out_file, lines.str());
  manifest.extra["prompt_hash"] = sha256_hex(lines.str());
  finish_manifest(out_file.string() + ".manifest.json", manifest);
  out << "wrote " << n << " prompts to " << out_file.string() << "\n";
  return 0;
}

struct TrainArgs {
  std::string in, out, config, target = "tesla", target_name;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  AppConfig config = config_or_default(a.config);
  config.model.seed = a.seed;
  config.vision.seed = a.seed;
  config.validate();
  const fs::path in_dir = data_dir(a.in);
  const CorpusBundle corpus = load_corpus_dir(in_dir);
  const std::string group = resolve_target(a.target, a.target_name).group();

  MultimodalModel model = MultimodalModel::init(config.model, config.vision);
  const std::string frozen_before = model.frozen_hash();
  ExampleBuilder builder(corpus, config.prompt, model);
  std::vector<TrainExample> examples;
  for (const auto& inst : corpus.instances) {
    if (inst.target_group == group && inst.gold && inst.split == Split::Train) {
      examples.push_back(builder.example_for(inst));
    }
  }
  if (examples.empty()) {
    throw Error(ErrorKind::ProtocolError, "no labeled train-split instances for '" + group + "'");
  }
  const TrainState state = train_model(model, examples, config.train, a.seed);

  const fs::path out_dir = a.out.empty() ? in_dir / "runs" / ("train-" + group) : fs::path(a.out);
  fs::create_directories(out_dir);
  model.to_tensors().save(out_dir / "model.ckpt");
  json log;
  log["loss"] = state.loss_history;
  log["steps"] = state.step;
  log["frozen_hash"] = model.frozen_hash();
  log["frozen_unchanged"] = model.frozen_hash() == frozen_before;
  write_file(out_dir / "train_log.json", log.dump(2) + "\n");
  write_file(out_dir / "config.json", app_config_to_json(config));

  RunManifest manifest = start_manifest("train", a.seed);
  manifest.config_hash = config_hash(config);
  manifest.corpus_hash = corpus_hash(corpus.instances);
  manifest.extra["target"] = group;
  finish_manifest(out_dir / "manifest.json", manifest);
  out << "trained " << state.step << " steps on " << examples.size() << " instances, final loss "
      << (state.loss_history.empty() ? 0.0 : state.loss_history.back()) << "\n";
  return 0;
}

struct EvalArgs {
  std::string in, out, config, mode = "in", source, dest, target;
  std::vector<std::string> ablation;
  std::uint64_t seed = 0;
  int threads = 1;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const AppConfig config = config_or_default(a.config);
  ProtocolSpec spec;
  spec.mode = a.mode == "cross" ? ProtocolMode::CrossTarget : ProtocolMode::InTarget;
  const std::string dest = !a.dest.empty() ? a.dest : a.target;
  if (dest.empty()) throw UsageError("--dest (or --target) is required");
  if (spec.mode == ProtocolMode::CrossTarget && a.source.empty()) {
    throw UsageError("--source is required for --mode cross");
  }
  spec.dest = TargetSpec::from_key(dest).group();
  spec.source = a.source.empty() ? spec.dest : TargetSpec::from_key(a.source).group();
  spec.ablation = parse_ablations(a.ablation);
  spec.seed = a.seed;
  spec.threads = a.threads;

  const fs::path in_dir = data_dir(a.in);
  const CorpusBundle corpus = load_corpus_dir(in_dir);
  RunManifest manifest = start_manifest("eval", a.seed);
  const ProtocolResult result = run_protocol(spec, config, corpus);

  std::string run_name = a.mode == "cross" ? spec.source + "-to-" + spec.dest : spec.dest;
  const fs::path out_dir = a.out.empty() ? in_dir / "runs" / ("eval-" + run_name) : fs::path(a.out);
  fs::create_directories(out_dir);
  write_file(out_dir / "report.json", report_to_json(result.report, &result.depth));
  const std::string table = render_report_table(result.report, &result.depth);
  write_file(out_dir / "report.txt", table);
  write_prediction_file(out_dir / "predictions.jsonl", result.predictions);

  manifest.config_hash = result.report.manifest.at("config_hash");
  manifest.corpus_hash = result.report.manifest.at("corpus_hash");
  manifest.extra = result.report.manifest;
  finish_manifest(out_dir / "manifest.json", manifest);
  out << table;
  return 0;
}

std::vector<Instance> gold_for(const std::vector<PredictionRecord>& predictions, const fs::path& in_dir) {
  std::set<std::string> ids;
  for (const auto& p : predictions) ids.insert(p.instance_id);
  std::vector<Instance> gold;
  for (auto& inst : read_instance_file(in_dir / "instances.jsonl")) {
    if (ids.contains(inst.instance_id)) gold.push_back(std::move(inst));
  }
  return gold;
}

struct SignificanceArgs {
  std::string a, b, in, out;
  int resamples = 1000;
  std::uint64_t seed = 0;
};

int cmd_significance(const SignificanceArgs& a, std::ostream& out) {
  const auto preds_a = read_prediction_file(a.a);
  const auto preds_b = read_prediction_file(a.b);
  const auto gold = gold_for(preds_a, data_dir(a.in));
  const SignificanceResult r = paired_bootstrap(preds_a, preds_b, gold, a.resamples, a.seed);
  const std::string body = significance_to_json(r);
  if (!a.out.empty()) write_file(a.out, body);
  out << body;
  return 0;
}

struct ReportArgs {
  std::string predictions, in, out, target_kind;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto preds = read_prediction_file(a.predictions);
  const auto gold = gold_for(preds, data_dir(a.in));
  const EvalReport report = evaluate(preds, gold);
  std::optional<DepthBucketReport> depth;
  if (!a.target_kind.empty()) {
    depth = depth_bucket_report(preds, gold,
                                a.target_kind == "post-t" ? TargetKind::PostT : TargetKind::Named);
  }
  const DepthBucketReport* dp = depth ? &*depth : nullptr;
  if (!a.out.empty()) {
    const fs::path out_dir = a.out;
    write_file(out_dir / "report.json", report_to_json(report, dp));
    write_file(out_dir / "report.txt", render_report_table(report, dp));
  }
  out << render_report_table(report, dp);
  return 0;
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["corpus_hash"] = m.corpus_hash;
  j["seed"] = m.seed;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["tool_version"] = m.tool_version;
  if (!m.extra.empty()) j["details"] = m.extra;
  write_file(path, j.dump(2) + "\n");
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal conversational stance detection workbench", "stancebench"};
  app.set_version_flag("--version", STANCEBENCH_VERSION);
  app.require_subcommand(1);

  const std::vector<std::string> targets = {"tesla", "bitcoin", "post-t", "custom"};
  const std::vector<std::string> ablations = {"no-caption", "no-cot", "single-sentence"};

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Filter a thread dump and flatten it into instances");
  c_ingest->add_option("--in", ingest.in, "Thread JSONL file")->required();
  c_ingest->add_option("--out", ingest.out, "Output corpus directory")->required();
  c_ingest->add_option("--filters", ingest.filters, "'default' or a JSON file of filter settings");
  c_ingest->add_option("--target", ingest.target, "Override the thread target")->check(CLI::IsMember(targets));
  c_ingest->add_option("--target-name", ingest.target_name, "Name for --target custom");
  c_ingest->add_option("--images", ingest.images, "Image directory (default: images/ next to --in)");

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Assign thread-level train/val/test splits");
  c_split->add_option("--in", split.in, "Corpus directory");
  c_split->add_option("--out", split.out, "Output directory (default: --in)");
  c_split->add_option("--seed", split.seed);
  c_split->add_option("--annotations", split.annotations, "Annotation log to merge first");
  c_split->add_option("--config", split.config);

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Label, vision and depth statistics");
  c_stats->add_option("--in", stats.in, "Corpus directory or instances file");
  c_stats->add_option("--out", stats.out, "JSON output file");
  c_stats->add_option("--reported", stats.reported, "Published counts to reconcile against");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("annotate-serve", "Serve the annotation API");
  c_serve->add_option("--in", serve.in, "Corpus directory");
  c_serve->add_option("--port", serve.port);
  c_serve->add_option("--host", serve.host);
  c_serve->add_option("--log", serve.log, "Record log (default: <in>/annotations.jsonl)");
  c_serve->add_option("--ui-dir", serve.ui_dir, "Static UI directory");
  c_serve->add_option("--lease-minutes", serve.lease_minutes)->check(CLI::PositiveNumber);

  PromptArgs prompts;
  auto* c_prompts = app.add_subcommand("prompts", "Render the text prompt of every instance");
  c_prompts->add_option("--in", prompts.in, "Corpus directory");
  c_prompts->add_option("--out", prompts.out, "Output JSONL");
  c_prompts->add_option("--config", prompts.config);
  c_prompts->add_option("--target", prompts.target)->check(CLI::IsMember(targets));
  c_prompts->add_option("--ablation", prompts.ablation)->check(CLI::IsMember(ablations));

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train adapters and projection on one target");
  c_train->add_option("--in", train.in, "Corpus directory");
  c_train->add_option("--out", train.out, "Run directory");
  c_train->add_option("--config", train.config);
  c_train->add_option("--target", train.target)->check(CLI::IsMember(targets));
  c_train->add_option("--target-name", train.target_name);
  c_train->add_option("--seed", train.seed);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Run an in-target or cross-target protocol");
  c_eval->add_option("--in", eval.in, "Corpus directory");
  c_eval->add_option("--out", eval.out, "Run directory");
  c_eval->add_option("--config", eval.config);
  c_eval->add_option("--mode", eval.mode)->check(CLI::IsMember({"in", "cross"}));
  c_eval->add_option("--source", eval.source);
  c_eval->add_option("--dest", eval.dest);
  c_eval->add_option("--target", eval.target, "Alias of --dest");
  c_eval->add_option("--ablation", eval.ablation)->check(CLI::IsMember(ablations));
  c_eval->add_option("--seed", eval.seed);
  c_eval->add_option("--threads", eval.threads)->check(CLI::PositiveNumber);

  SignificanceArgs sig;
  auto* c_sig = app.add_subcommand("significance", "Paired bootstrap over F1-avg");
  c_sig->add_option("--a", sig.a, "Predictions of system A")->required();
  c_sig->add_option("--b", sig.b, "Predictions of system B")->required();
  c_sig->add_option("--in", sig.in, "Corpus directory with gold labels");
  c_sig->add_option("--out", sig.out);
  c_sig->add_option("--resamples", sig.resamples);
  c_sig->add_option("--seed", sig.seed);

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Score a predictions file");
  c_report->add_option("--predictions", report.predictions)->required();
  c_report->add_option("--in", report.in, "Corpus directory with gold labels");
  c_report->add_option("--out", report.out, "Output directory");
  c_report->add_option("--depth-buckets", report.target_kind, "named or post-t")
      ->check(CLI::IsMember({"named", "post-t"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, out);
    if (c_split->parsed()) return cmd_split(split, out);
    if (c_stats->parsed()) return cmd_stats(stats, out);
    if (c_serve->parsed()) return cmd_serve(serve, out);
    if (c_prompts->parsed()) return cmd_prompts(prompts, out);
    if (c_train->parsed()) return cmd_train(train, out);
    if (c_eval->parsed()) return cmd_eval(eval, out);
    if (c_sig->parsed()) return cmd_significance(sig, out);
    if (c_report->parsed()) return cmd_report(report, out);
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: ConfigInvalid: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace stancebench
