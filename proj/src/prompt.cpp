#include "stancebench/prompt.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "stancebench/error.hpp"

namespace stancebench {

using nlohmann::json;

const char* const kDefaultTaskTag = "[stance detection]";

const char* const kDefaultTaskTemplate =
    "The following is a conversation on social media based on a post. All comments are "
    "responses to the content of the post, and each comment replies to the previous one. "
    "There are three stances [favor, against, none]. Choose one of the three stances to "
    "express {name}'s stance towards \"{target}\".";

const char* const kDefaultCaseText =
    "Case: U1: Just picked up the new Brightline kettle, it boils a full pot in two minutes.\n"
    "U2: I have had mine for a year and it still works perfectly.\n"
    "Question: what is U2's stance towards \"Brightline kettle\"?\n"
    "Answer: favor";

const char* const kDefaultVisualPrefix = "The image attached to the post is:";

namespace {

constexpr std::string_view kCaptionHeader = "Caption: ";

std::mutex g_sink_mutex;
std::function<void(std::string_view)> g_warning_sink = [](std::string_view msg) {
  std::cerr << "warning: " << msg << '\n';
};

void warn(std::string_view msg) {
  std::lock_guard lock(g_sink_mutex);
  if (g_warning_sink) g_warning_sink(msg);
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string single_line(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

std::string join_lines(const std::vector<std::string_view>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += '\n';
    out += parts[i];
  }
  return out;
}

}  // namespace

void set_prompt_warning_sink(std::function<void(std::string_view)> sink) {
  std::lock_guard lock(g_sink_mutex);
  g_warning_sink = std::move(sink);
}

void PromptTemplateConfig::validate() const {
  auto invalid = [](const std::string& msg) { throw Error(ErrorKind::TemplateInvalid, msg); };
  if (count_occurrences(p_t_template, "{name}") != 1) {
    invalid("task template must contain {name} exactly once");
  }
  if (count_occurrences(p_t_template, "{target}") != 1) {
    invalid("task template must contain {target} exactly once");
  }
  if (p_t_template.find('\n') != std::string::npos) invalid("task template must be one line");
  if (p_t_template.starts_with(kCaptionHeader)) invalid("task template may not start with 'Caption: '");
  if (task_tag.empty() || task_tag.find('\n') != std::string::npos) {
    invalid("task tag must be a non-empty single line");
  }
  if (p_v_text.find('\n') != std::string::npos) invalid("visual prefix must be one line");
}

PromptTemplateConfig parse_template_config(std::string_view json_text) {
  PromptTemplateConfig c;
  try {
    const json j = json::parse(json_text);
    c.task_tag = j.value("task_tag", c.task_tag);
    c.p_t_template = j.value("p_t_template", c.p_t_template);
    c.case_text = j.value("case_text", c.case_text);
    c.p_v_text = j.value("p_v_text", c.p_v_text);
    if (j.contains("ablation")) {
      const auto& a = j["ablation"];
      c.flags.omit_caption = a.value("omit_caption", false);
      c.flags.omit_case = a.value("omit_case", false);
      c.flags.single_sentence = a.value("single_sentence", false);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::TemplateInvalid, std::string("template config: ") + e.what());
  }
  c.validate();
  return c;
}

PromptTemplateConfig load_template_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_template_config(buf.str());
}

std::string template_config_to_json(const PromptTemplateConfig& c) {
  json j = {{"task_tag", c.task_tag},
            {"p_t_template", c.p_t_template},
            {"case_text", c.case_text},
            {"p_v_text", c.p_v_text},
            {"ablation",
             {{"omit_caption", c.flags.omit_caption},
              {"omit_case", c.flags.omit_case},
              {"single_sentence", c.flags.single_sentence}}}};
  return j.dump(2);
}

std::string render_task_prompt(std::string_view target, std::string_view focus_author,
                               const PromptTemplateConfig& config) {
  config.validate();
  std::string out = config.p_t_template;
  // Substitute {target} first so a target containing "{name}" is left alone.
  const auto tpos = out.find("{target}");
  const auto npos = out.find("{name}");
  const std::string target_text = single_line(target);
  const std::string name_text = single_line(focus_author);
  if (tpos > npos) {
    out.replace(tpos, 8, target_text);
    out.replace(npos, 6, name_text);
  } else {
    out.replace(npos, 6, name_text);
    out.replace(tpos, 8, target_text);
  }
  return out;
}

std::string render_conversation(std::span<const Utterance> path, bool single_sentence) {
  std::string out;
  const std::size_t first = single_sentence && !path.empty() ? path.size() - 1 : 0;
  for (std::size_t i = first; i < path.size(); ++i) {
    if (i > first) out += '\n';
    out += single_line(path[i].author);
    out += ": ";
    out += single_line(path[i].text);
  }
  return out;
}

std::string build_oneshot(std::string_view p_t, std::span<const Utterance> path,
                          std::string_view case_text, const AblationFlags& flags) {
  if (path.empty()) throw Error(ErrorKind::EmptyConversation, "conversation path is empty");
  const std::string conversation = render_conversation(path, flags.single_sentence);
  std::vector<std::string_view> parts = {p_t, conversation};
  if (!flags.omit_case && !case_text.empty()) parts.push_back(case_text);
  return join_lines(parts);
}

std::string build_text_input(std::string_view caption, std::string_view delta,
                             const AblationFlags& flags, const PromptTemplateConfig& config) {
  std::vector<std::string_view> parts = {config.task_tag};
  std::string caption_line;
  if (!flags.omit_caption) {
    if (caption.empty()) warn("empty caption; emitting caption header with no description");
    caption_line = std::string(kCaptionHeader) + single_line(caption);
    parts.push_back(caption_line);
  }
  parts.push_back(delta);
  return join_lines(parts);
}

TextInputParts split_text_input(std::string_view gamma_t, const PromptTemplateConfig& config) {
  const auto lines = split_lines(gamma_t);
  auto bad = [](const std::string& msg) -> TextInputParts {
    throw Error(ErrorKind::TemplateInvalid, "cannot decompose text input: " + msg);
  };
  if (lines.size() < 3) return bad("too few lines");
  TextInputParts parts;
  if (lines[0] != config.task_tag) return bad("missing task tag");
  parts.task_tag = lines[0];
  std::size_t i = 1;
  if (lines[1].starts_with(kCaptionHeader)) {
    parts.caption = lines[1].substr(kCaptionHeader.size());
    i = 2;
  }
  if (i >= lines.size()) return bad("missing task prompt");
  parts.p_t = lines[i++];
  std::size_t end = lines.size();
  if (!config.case_text.empty()) {
    const auto case_lines = split_lines(config.case_text);
    if (end - i > case_lines.size()) {
      bool match = true;
      for (std::size_t k = 0; k < case_lines.size(); ++k) {
        if (lines[end - case_lines.size() + k] != case_lines[k]) {
          match = false;
          break;
        }
      }
      if (match) {
        parts.case_text = config.case_text;
        end -= case_lines.size();
      }
    }
  }
  if (end <= i) return bad("no conversation lines");
  parts.conversation_lines.assign(lines.begin() + static_cast<std::ptrdiff_t>(i),
                                  lines.begin() + static_cast<std::ptrdiff_t>(end));
  return parts;
}

// ---- tokenizer ------------------------------------------------------------

std::string_view marker_text(Marker m) {
  switch (m) {
    case Marker::Inst: return "[INST]";
    case Marker::InstEnd: return "[/INST]";
    case Marker::ImgBegin: return "<Img>";
    case Marker::ImgEnd: return "</Img>";
    case Marker::AnswerStart: return "<answer>";
    case Marker::Pad: return "<pad>";
  }
  return "";
}

std::optional<int> marker_id(std::string_view text) {
  for (int id = 256; id < kVocabularySize; ++id) {
    if (marker_text(static_cast<Marker>(id)) == text) return id;
  }
  return std::nullopt;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  seq.ids.reserve(text.size());
  for (unsigned char c : text) seq.ids.push_back(c);
  return seq;
}

std::string detokenize(std::span<const int> ids, int vocabulary_size) {
  std::string out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || id >= vocabulary_size || id >= kVocabularySize) {
      throw Error(ErrorKind::TokenOutOfRange, "token id " + std::to_string(id) + " out of range");
    }
    if (id < 256) {
      out += static_cast<char>(static_cast<unsigned char>(id));
    } else {
      out += marker_text(static_cast<Marker>(id));
    }
  }
  return out;
}

// ---- captions -------------------------------------------------------------

CaptionRecord Captioner::caption(const std::string& image_ref) {
  const auto file = resolve(image_ref);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(file, ec)) {
    throw Error(ErrorKind::ImageMissing, "image not found: " + file.string());
  }
  return describe(image_ref, file);
}

StubCaptioner::StubCaptioner(std::filesystem::path image_root,
                             std::map<std::string, std::string> captions)
    : Captioner(std::move(image_root)), captions_(std::move(captions)) {}

std::map<std::string, std::string> StubCaptioner::load_captions(const std::filesystem::path& jsonl) {
  std::map<std::string, std::string> out;
  std::ifstream in(jsonl);
  if (!in) return out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out[j.at("image_ref").get<std::string>()] = j.at("caption").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedLine,
                  "captions line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

CaptionRecord StubCaptioner::describe(const std::string& image_ref,
                                      const std::filesystem::path& file) {
  if (auto it = captions_.find(image_ref); it != captions_.end()) {
    return {image_ref, it->second, CaptionSource::Stub};
  }
  return {image_ref, "image:" + file.filename().string(), CaptionSource::Stub};
}

ExternalCaptioner::ExternalCaptioner(std::filesystem::path image_root, Client client)
    : Captioner(std::move(image_root)), client_(std::move(client)) {}

CaptionRecord ExternalCaptioner::describe(const std::string& image_ref,
                                          const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto bytes = std::as_bytes(std::span<const char>(raw));
  std::string text = client_(bytes);
  if (text.empty()) {
    throw Error(ErrorKind::CaptionFailed, "external captioner returned no text for " + image_ref);
  }
  return {image_ref, std::move(text), CaptionSource::External};
}

CaptionRecord get_caption(const std::string& image_ref, Captioner& captioner) {
  return captioner.caption(image_ref);
}

// ---- bundles --------------------------------------------------------------

std::string instance_caption(const Instance& instance, Captioner* captioner) {
  if (captioner == nullptr) return {};
  std::string out;
  for (const auto& ref : instance.image_refs) {
    if (!out.empty()) out += "; ";
    out += captioner->caption(ref).caption;
  }
  return out;
}

PromptBundle build_prompt_bundle(const Instance& instance, std::string_view caption,
                                 const PromptTemplateConfig& config) {
  PromptBundle b;
  b.p_t = render_task_prompt(instance.target, instance.focus().author, config);
  b.conversation_block = render_conversation(instance.path, config.flags.single_sentence);
  b.case_text = config.flags.omit_case ? std::string{} : config.case_text;
  b.delta = build_oneshot(b.p_t, instance.path, config.case_text, config.flags);
  b.caption = config.flags.omit_caption ? std::string{} : single_line(caption);
  b.gamma_t = build_text_input(caption, b.delta, config.flags, config);
  b.gamma_t_tokens = tokenize(b.gamma_t);
  return b;
}

}  // namespace stancebench
