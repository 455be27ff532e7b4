#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stancebench/nn.hpp"

namespace stancebench {

struct NamedTensor {
  std::string name;
  std::vector<std::int64_t> shape;
  bool frozen = true;
  std::vector<double> data;  // row-major
};

// Binary container: "SBCKPT01", u64 little-endian header length, JSON header
// {"tensors":[{"name","shape","frozen","offset"}]}, then raw little-endian
// f64 payloads in header order.
class TensorStore {
 public:
  void add(std::string name, const Mat& m, bool frozen);
  void add(std::string name, const RowVec& v, bool frozen);

  const NamedTensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  Mat matrix(const std::string& name) const;
  RowVec row_vector(const std::string& name) const;

  const std::vector<NamedTensor>& tensors() const { return tensors_; }

  void save(const std::filesystem::path& path) const;
  static TensorStore load(const std::filesystem::path& path);

  // SHA-256 over names, shapes and payload bytes of the selected tensors.
  std::string hash(bool frozen_only) const;

 private:
  std::vector<NamedTensor> tensors_;
};

}  // namespace stancebench
