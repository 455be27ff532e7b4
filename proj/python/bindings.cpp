#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "stancebench/annotation.hpp"
#include "stancebench/cli.hpp"
#include "stancebench/corpus.hpp"
#include "stancebench/error.hpp"
#include "stancebench/eval.hpp"
#include "stancebench/fusion.hpp"
#include "stancebench/prompt.hpp"
#include "stancebench/synthetic.hpp"
#include "stancebench/vision.hpp"

namespace py = pybind11;
using namespace stancebench;

namespace {

StanceLabel label_arg(const std::string& text) {
  const auto label = parse_stance(text);
  if (!label) throw Error(ErrorKind::ConfigInvalid, "unknown stance label '" + text + "'");
  return *label;
}

py::dict scores_dict(const Scores& s) {
  py::dict d;
  d["f1_against"] = s.f1_against;
  d["f1_favor"] = s.f1_favor;
  d["f1_none"] = s.f1_none;
  d["f1_avg"] = s.f1_avg;
  d["n"] = s.n;
  return d;
}

py::object json_to_py(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stance detection workbench core";
  m.attr("__version__") = STANCEBENCH_VERSION;

  static PyObject* error_type = PyErr_NewException("stancebench._core.StanceBenchError", PyExc_RuntimeError, nullptr);
  m.attr("StanceBenchError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(std::string(e.name()) + ": " + e.what());
      exc.attr("kind") = std::string(e.name());
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def(
      "match_label",
      [](const std::string& text) {
        const auto p = match_label(text);
        return py::make_tuple(std::string(to_string(p.matched)), std::string(to_string(p.method)));
      },
      py::arg("text"), "Map generated text to (label, method).");

  m.def("edit_distance", &edit_distance, py::arg("a"), py::arg("b"));
  m.def("f1_avg", &f1_avg, py::arg("f1_against"), py::arg("f1_favor"));
  m.def("round_half_up2", &round_half_up2, py::arg("value"));

  m.def(
      "score",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& predicted) {
        if (gold.size() != predicted.size()) {
          throw Error(ErrorKind::PredictionGoldMismatch, "gold and predicted lengths differ");
        }
        ConfusionCounts c;
        for (std::size_t i = 0; i < gold.size(); ++i) c.add(label_arg(gold[i]), label_arg(predicted[i]));
        return scores_dict(Scores::from_counts(c));
      },
      py::arg("gold"), py::arg("predicted"), "F1 scores in percent for parallel label lists.");

  m.def(
      "cohen_kappa",
      [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        std::vector<LabelPair> converted;
        for (const auto& [a, b] : pairs) converted.emplace_back(label_arg(a), label_arg(b));
        return cohen_kappa(converted);
      },
      py::arg("pairs"));

  m.def(
      "patchify",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> image, int patch_size) {
        if (image.ndim() != 3 || image.shape(2) != Image::kChannels) {
          throw Error(ErrorKind::DimensionError, "expected an H x W x 3 array");
        }
        Image img(static_cast<int>(image.shape(0)), static_cast<int>(image.shape(1)));
        std::copy(image.data(), image.data() + image.size(), img.pixels.begin());
        const auto seq = patchify(img, patch_size);
        py::array_t<double> out({seq.patches.rows(), seq.patches.cols()});
        std::copy(seq.patches.data(), seq.patches.data() + seq.patches.size(), out.mutable_data());
        return out;
      },
      py::arg("image"), py::arg("patch_size"), "Row-major patches, one row per patch.");

  m.def(
      "build_prompt",
      [](const std::string& instance_json, const std::string& caption, const std::string& template_json) {
        const Instance inst = parse_instance_line(instance_json, 1);
        const PromptTemplateConfig cfg =
            template_json.empty() ? PromptTemplateConfig{} : parse_template_config(template_json);
        const auto b = build_prompt_bundle(inst, caption, cfg);
        py::dict d;
        d["p_t"] = b.p_t;
        d["conversation"] = b.conversation_block;
        d["case_text"] = b.case_text;
        d["delta"] = b.delta;
        d["caption"] = b.caption;
        d["gamma_t"] = b.gamma_t;
        return d;
      },
      py::arg("instance_json"), py::arg("caption"), py::arg("template_json") = "");

  m.def(
      "corpus_stats",
      [](const std::filesystem::path& instances_path) {
        const auto stats = compute_corpus_stats(read_instance_file(instances_path));
        auto target = [](const TargetStats& t) {
          py::dict d;
          d["total"] = t.total;
          for (auto l : kAllLabels) d[py::str(std::string(to_string(l)) + "_percent")] = t.label_percent(l);
          d["vision_percent"] = t.vision_percent();
          return d;
        };
        py::dict per_target;
        for (const auto& [name, t] : stats.per_target) per_target[py::str(name)] = target(t);
        py::dict depths;
        for (const auto& [depth, d] : stats.per_depth) depths[py::int_(depth)] = py::make_tuple(d.count, d.mean_words);
        py::dict out;
        out["total"] = stats.total;
        out["overall"] = target(stats.overall);
        out["per_target"] = per_target;
        out["per_depth"] = depths;
        return out;
      },
      py::arg("instances_path"));

  m.def(
      "evaluate_files",
      [](const std::filesystem::path& predictions, const std::filesystem::path& instances) {
        const auto preds = read_prediction_file(predictions);
        const auto gold = read_instance_file(instances);
        return json_to_py(report_to_json(evaluate(preds, gold), nullptr));
      },
      py::arg("predictions"), py::arg("instances"));

  m.def(
      "paired_bootstrap_files",
      [](const std::filesystem::path& a, const std::filesystem::path& b,
         const std::filesystem::path& instances, int resamples, std::uint64_t seed) {
        const auto pa = read_prediction_file(a);
        const auto pb = read_prediction_file(b);
        const auto gold = read_instance_file(instances);
        return json_to_py(significance_to_json(paired_bootstrap(pa, pb, gold, resamples, seed)));
      },
      py::arg("a"), py::arg("b"), py::arg("instances"), py::arg("resamples") = 1000, py::arg("seed") = 0);

  m.def(
      "write_toy_corpus",
      [](const std::filesystem::path& dir, const std::vector<std::string>& targets, int per_target,
         std::uint64_t seed) {
        ToyCorpusOptions o;
        o.targets = targets;
        o.instances_per_target = per_target;
        o.seed = seed;
        return write_toy_corpus(dir, o).size();
      },
      py::arg("dir"), py::arg("targets") = std::vector<std::string>{"Tesla", "Bitcoin"},
      py::arg("per_target") = 8, py::arg("seed") = 0, "Returns the number of instances written.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv = {"stancebench"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI subcommand; returns (exit_code, stdout, stderr).");
}
