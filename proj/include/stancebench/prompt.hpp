#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stancebench/corpus.hpp"

namespace stancebench {

// ---- templates ----------------------------------------------------------

struct AblationFlags {
  bool omit_caption = false;     // w/o Caption
  bool omit_case = false;        // w/o CoT
  bool single_sentence = false;  // render only the focus utterance
};

extern const char* const kDefaultTaskTag;
extern const char* const kDefaultTaskTemplate;
extern const char* const kDefaultCaseText;
extern const char* const kDefaultVisualPrefix;

struct PromptTemplateConfig {
  std::string task_tag = kDefaultTaskTag;
  std::string p_t_template = kDefaultTaskTemplate;  // {name} and {target} slots
  std::string case_text = kDefaultCaseText;
  std::string p_v_text = kDefaultVisualPrefix;
  AblationFlags flags;

  // Throws TemplateInvalid unless each slot occurs exactly once and the
  // template, task tag and case fit the line-oriented layout.
  void validate() const;
};

PromptTemplateConfig parse_template_config(std::string_view json_text);
PromptTemplateConfig load_template_config(const std::filesystem::path& path);
std::string template_config_to_json(const PromptTemplateConfig& config);

// Receives non-fatal prompt-construction warnings (default: stderr).
void set_prompt_warning_sink(std::function<void(std::string_view)> sink);

// ---- prompt assembly -------------------------------------------------------

std::string render_task_prompt(std::string_view target, std::string_view focus_author,
                               const PromptTemplateConfig& config);

// "author: text" per utterance, newline separated, path order. Newlines inside
// text are flattened to spaces so one utterance is one line.
std::string render_conversation(std::span<const Utterance> path, bool single_sentence);

// delta = P^T, conversation, Case (newline joined; Case dropped when omitted).
std::string build_oneshot(std::string_view p_t, std::span<const Utterance> path,
                          std::string_view case_text, const AblationFlags& flags);

// gamma_t = task tag, "Caption: " + caption, delta (caption line dropped when omitted).
std::string build_text_input(std::string_view caption, std::string_view delta,
                             const AblationFlags& flags, const PromptTemplateConfig& config);

struct TextInputParts {
  std::string task_tag;
  std::optional<std::string> caption;
  std::string p_t;
  std::vector<std::string> conversation_lines;
  std::optional<std::string> case_text;
};

// Inverse of build_text_input/build_oneshot for a given template.
TextInputParts split_text_input(std::string_view gamma_t, const PromptTemplateConfig& config);

// ---- tokenizer ------------------------------------------------------------

inline constexpr int kVocabularySize = 262;

enum class Marker : int {
  Inst = 256,
  InstEnd = 257,
  ImgBegin = 258,
  ImgEnd = 259,
  AnswerStart = 260,
  Pad = 261,
};

inline constexpr int token_id(Marker m) { return static_cast<int>(m); }
std::string_view marker_text(Marker m);
std::optional<int> marker_id(std::string_view text);

struct TokenSequence {
  std::vector<int> ids;
  int vocabulary_size = kVocabularySize;
};

// Byte-level: each byte maps to its value. Markers never come out of tokenize.
TokenSequence tokenize(std::string_view text);
// Bytes back to text; marker ids render as their marker text.
std::string detokenize(std::span<const int> ids, int vocabulary_size = kVocabularySize);
inline std::string detokenize(const TokenSequence& seq) {
  return detokenize(seq.ids, seq.vocabulary_size);
}

// ---- captions -------------------------------------------------------------

enum class CaptionSource { Stub, External };

struct CaptionRecord {
  std::string image_ref;
  std::string caption;
  CaptionSource source = CaptionSource::Stub;
};

class Captioner {
 public:
  explicit Captioner(std::filesystem::path image_root) : root_(std::move(image_root)) {}
  virtual ~Captioner() = default;

  // Throws ImageMissing when the reference does not resolve to a file.
  CaptionRecord caption(const std::string& image_ref);
  std::filesystem::path resolve(const std::string& image_ref) const { return root_ / image_ref; }

 protected:
  virtual CaptionRecord describe(const std::string& image_ref,
                                 const std::filesystem::path& file) = 0;

 private:
  std::filesystem::path root_;
};

// Captions from captions.jsonl, falling back to "image:<filename>".
class StubCaptioner : public Captioner {
 public:
  StubCaptioner(std::filesystem::path image_root, std::map<std::string, std::string> captions = {});
  static std::map<std::string, std::string> load_captions(const std::filesystem::path& jsonl);

 protected:
  CaptionRecord describe(const std::string& image_ref, const std::filesystem::path& file) override;

 private:
  std::map<std::string, std::string> captions_;
};

// Adapter for a hosted vision-language client: image bytes in, text out.
class ExternalCaptioner : public Captioner {
 public:
  using Client = std::function<std::string(std::span<const std::byte>)>;
  ExternalCaptioner(std::filesystem::path image_root, Client client);

 protected:
  CaptionRecord describe(const std::string& image_ref, const std::filesystem::path& file) override;

 private:
  Client client_;
};

CaptionRecord get_caption(const std::string& image_ref, Captioner& captioner);

// ---- bundles --------------------------------------------------------------

struct PromptBundle {
  std::string p_t;
  std::string conversation_block;
  std::string case_text;  // empty when omitted
  std::string delta;
  std::string caption;
  std::string gamma_t;
  TokenSequence gamma_t_tokens;
};

// Caption text for an instance: captions of all post images joined by "; ".
std::string instance_caption(const Instance& instance, Captioner* captioner);

PromptBundle build_prompt_bundle(const Instance& instance, std::string_view caption,
                                 const PromptTemplateConfig& config);

}  // namespace stancebench
