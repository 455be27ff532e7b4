#include "stancebench/annotation_server.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "stancebench/error.hpp"

namespace stancebench {

using json = nlohmann::json;

namespace {

std::int64_t to_ms(Timestamp t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& msg) {
  send_json(res, status, json{{"error", kind}, {"message", msg}}.dump());
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownInstance: return 404;
    case ErrorKind::AlreadyLabeled:
    case ErrorKind::LeaseInvalid: return 409;
    case ErrorKind::ImageMissing: return 404;
    default: return 500;
  }
}

json lines_json(const std::vector<std::pair<std::string, std::string>>& lines) {
  json out = json::array();
  for (const auto& [author, text] : lines) out.push_back({{"author", author}, {"text", text}});
  return out;
}

json image_urls(const std::vector<std::string>& refs) {
  json out = json::array();
  for (const auto& r : refs) out.push_back("/img/" + r);
  return out;
}

}  // namespace

std::string task_to_json(const std::optional<TaskView>& task) {
  if (!task) return json{{"task", nullptr}}.dump();
  json t;
  t["instance_id"] = task->instance_id;
  t["thread_id"] = task->thread_id;
  t["target"] = task->target;
  t["round"] = std::string(to_string(task->round));
  t["lines"] = lines_json(task->lines);
  t["image_refs"] = task->image_refs;
  t["image_urls"] = image_urls(task->image_refs);
  t["captions"] = task->captions;
  t["lease_expiry_ms"] = to_ms(task->lease_expiry);
  return json{{"task", t}}.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string progress_to_json(const ProgressReport& p, const std::string& annotator_id) {
  json j;
  j["instances"] = p.instances;
  json rounds = json::object();
  for (Round r : {Round::First, Round::Second, Round::TieBreak}) {
    auto it = p.completed_per_round.find(r);
    rounds[std::string(to_string(r))] = it == p.completed_per_round.end() ? 0 : it->second;
  }
  j["completed_per_round"] = rounds;
  j["resolved"] = p.resolved;
  j["awaiting_tie_break"] = p.awaiting_tie_break;
  j["unresolved_count"] = p.unresolved.size();
  j["unresolved"] = p.unresolved;
  j["per_annotator"] = p.per_annotator;
  j["active_leases"] = p.active_leases;
  if (!annotator_id.empty()) {
    auto it = p.per_annotator.find(annotator_id);
    j["personal"] = it == p.per_annotator.end() ? 0 : it->second;
  }
  return j.dump();
}

std::string agreement_to_json(const AgreementReport& report) {
  json targets = json::object();
  for (const auto& [group, a] : report.per_target) {
    json t;
    t["kappa"] = a.kappa ? json(*a.kappa) : json(nullptr);
    t["kappa_error"] = a.kappa_error;
    t["counted_pairs"] = a.counted_pairs;
    t["resolved"] = a.resolved;
    t["unresolved"] = a.unresolved;
    t["pending"] = a.pending;
    targets[group] = t;
  }
  return json{{"per_target", targets}}.dump();
}

struct AnnotationServer::Impl {
  AnnotationStore& store;
  AnnotationServerOptions options;
  httplib::Server server;
  std::thread thread;

  Impl(AnnotationStore& s, AnnotationServerOptions o) : store(s), options(std::move(o)) { routes(); }

  void routes() {
    server.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string annotator = req.get_param_value("annotator");
      if (annotator.empty()) return send_error(res, 400, "BadRequest", "annotator is required");
      guarded(res, [&] { send_json(res, 200, task_to_json(store.next_task(annotator))); });
    });

    server.Post(R"(/api/tasks/([^/]+)/label)", [this](const httplib::Request& req,
                                                       httplib::Response& res) {
      const std::string instance_id = req.matches[1];
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        return send_error(res, 400, "BadRequest", "body must be JSON");
      }
      std::string annotator = req.get_param_value("annotator");
      if (body.contains("annotator") && body["annotator"].is_string()) {
        annotator = body["annotator"].get<std::string>();
      }
      if (annotator.empty()) return send_error(res, 400, "BadRequest", "annotator is required");
      if (!body.contains("label") || !body["label"].is_string()) {
        return send_error(res, 400, "BadRequest", "label is required");
      }
      const auto label = parse_stance(body["label"].get<std::string>());
      if (!label) return send_error(res, 400, "BadRequest", "label must be against, favor or none");
      bool vision = false;
      if (body.contains("vision_related")) {
        if (!body["vision_related"].is_boolean()) {
          return send_error(res, 400, "BadRequest", "vision_related must be a boolean");
        }
        vision = body["vision_related"].get<bool>();
      }
      guarded(res, [&] {
        const AnnotationRecord rec = store.submit_label(annotator, instance_id, *label, vision);
        send_json(res, 200, record_to_json_line(rec));
      });
    });

    server.Get(R"(/api/threads/([^/]+))", [this](const httplib::Request& req,
                                                  httplib::Response& res) {
      const std::string thread_id = req.matches[1];
      guarded(res, [&] {
        const auto instances = store.instances_of_thread(thread_id);
        if (instances.empty()) {
          return send_error(res, 404, "UnknownInstance", "no thread '" + thread_id + "'");
        }
        json items = json::array();
        for (const auto& inst : instances) {
          json it;
          it["instance_id"] = inst.instance_id;
          it["target"] = inst.target;
          it["depth"] = inst.depth;
          std::vector<std::pair<std::string, std::string>> lines;
          for (const auto& u : inst.path) lines.emplace_back(u.author, u.text);
          it["lines"] = lines_json(lines);
          it["image_urls"] = image_urls(inst.image_refs);
          const auto outcome = store.gold(inst.instance_id);
          it["gold"] = outcome && outcome->label ? json(std::string(to_string(*outcome->label)))
                                                 : json(nullptr);
          items.push_back(it);
        }
        send_json(res, 200,
                  json{{"thread_id", thread_id}, {"instances", items}}.dump(
                      -1, ' ', false, json::error_handler_t::replace));
      });
    });

    server.Get("/api/progress", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        send_json(res, 200, progress_to_json(store.progress(), req.get_param_value("annotator")));
      });
    });

    server.Get("/api/agreement", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, agreement_to_json(store.agreement())); });
    });

    if (!options.image_root.empty() && std::filesystem::is_directory(options.image_root)) {
      server.set_mount_point("/img", options.image_root.string());
    }
    if (!options.ui_dir.empty() && std::filesystem::is_directory(options.ui_dir)) {
      server.set_mount_point("/", options.ui_dir.string());
    }
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      send_error(res, status_for(e.kind()), e.name(), e.what());
    }
  }
};

AnnotationServer::AnnotationServer(AnnotationStore& store, AnnotationServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::IoError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

int AnnotationServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void AnnotationServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace stancebench
