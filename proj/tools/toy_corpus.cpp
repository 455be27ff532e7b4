// Writes the small multimodal demo corpus used by the examples and tests.
#include <iostream>

#include <CLI11.hpp>

#include "stancebench/error.hpp"
#include "stancebench/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a toy multimodal stance corpus", "stancebench-toy-corpus"};
  std::string out;
  stancebench::ToyCorpusOptions options;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--per-target", options.instances_per_target)->check(CLI::Range(3, 10000));
  app.add_option("--targets", options.targets);
  app.add_option("--image-size", options.image_size)->check(CLI::PositiveNumber);
  app.add_option("--seed", options.seed);
  CLI11_PARSE(app, argc, argv);
  try {
    const auto instances = stancebench::write_toy_corpus(out, options);
    std::cout << "wrote " << instances.size() << " instances to " << out << "\n";
  } catch (const stancebench::Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
