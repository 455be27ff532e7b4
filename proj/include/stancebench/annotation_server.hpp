#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "stancebench/annotation.hpp"

namespace stancebench {

struct AnnotationServerOptions {
  std::filesystem::path image_root;  // served under /img/
  std::filesystem::path ui_dir;      // optional static UI served at /
};

// JSON API over an AnnotationStore:
//   GET  /api/tasks/next?annotator=ID
//   POST /api/tasks/{instance_id}/label  {"annotator", "label", "vision_related"}
//   GET  /api/threads/{thread_id}
//   GET  /api/progress[?annotator=ID]
//   GET  /api/agreement
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, AnnotationServerOptions options);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  void serve();
  // bind + serve on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Bodies returned by the API, exposed for tests and tooling.
std::string task_to_json(const std::optional<TaskView>& task);
std::string progress_to_json(const ProgressReport& progress, const std::string& annotator_id);
std::string agreement_to_json(const AgreementReport& report);

}  // namespace stancebench
