#include "stancebench/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "stancebench/error.hpp"
#include "stancebench/hashing.hpp"

namespace stancebench {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {
constexpr char kMagic[8] = {'S', 'B', 'C', 'K', 'P', 'T', '0', '1'};
}

void TensorStore::add(std::string name, const Mat& m, bool frozen) {
  NamedTensor t{std::move(name), {m.rows(), m.cols()}, frozen,
                std::vector<double>(m.data(), m.data() + m.size())};
  tensors_.push_back(std::move(t));
}

void TensorStore::add(std::string name, const RowVec& v, bool frozen) {
  NamedTensor t{std::move(name), {v.cols()}, frozen,
                std::vector<double>(v.data(), v.data() + v.size())};
  tensors_.push_back(std::move(t));
}

const NamedTensor& TensorStore::get(const std::string& name) const {
  auto it = std::find_if(tensors_.begin(), tensors_.end(),
                         [&](const NamedTensor& t) { return t.name == name; });
  if (it == tensors_.end()) throw Error(ErrorKind::CheckpointError, "missing tensor '" + name + "'");
  return *it;
}

bool TensorStore::contains(const std::string& name) const {
  return std::any_of(tensors_.begin(), tensors_.end(),
                     [&](const NamedTensor& t) { return t.name == name; });
}

Mat TensorStore::matrix(const std::string& name) const {
  const auto& t = get(name);
  if (t.shape.size() != 2) throw Error(ErrorKind::CheckpointError, "'" + name + "' is not 2-D");
  Mat m(t.shape[0], t.shape[1]);
  std::copy(t.data.begin(), t.data.end(), m.data());
  return m;
}

RowVec TensorStore::row_vector(const std::string& name) const {
  const auto& t = get(name);
  if (t.shape.size() != 1) throw Error(ErrorKind::CheckpointError, "'" + name + "' is not 1-D");
  RowVec v(t.shape[0]);
  std::copy(t.data.begin(), t.data.end(), v.data());
  return v;
}

void TensorStore::save(const std::filesystem::path& path) const {
  json header;
  header["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors_) {
    header["tensors"].push_back(
        {{"name", t.name}, {"shape", t.shape}, {"frozen", t.frozen}, {"offset", offset}});
    offset += t.data.size() * sizeof(double);
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors_) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

TensorStore TensorStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::CheckpointError, path.string() + ": bad magic");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ULL << 32)) throw Error(ErrorKind::CheckpointError, "bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  TensorStore store;
  try {
    const json header = json::parse(text);
    for (const auto& jt : header.at("tensors")) {
      NamedTensor t;
      t.name = jt.at("name").get<std::string>();
      t.shape = jt.at("shape").get<std::vector<std::int64_t>>();
      t.frozen = jt.at("frozen").get<bool>();
      std::int64_t n = 1;
      for (auto s : t.shape) {
        if (s < 0) throw Error(ErrorKind::CheckpointError, "negative dimension");
        n *= s;
      }
      t.data.resize(static_cast<std::size_t>(n));
      in.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
      if (!in) throw Error(ErrorKind::CheckpointError, "truncated payload for '" + t.name + "'");
      store.tensors_.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CheckpointError, std::string("header: ") + e.what());
  }
  return store;
}

std::string TensorStore::hash(bool frozen_only) const {
  Sha256 h;
  for (const auto& t : tensors_) {
    if (frozen_only && !t.frozen) continue;
    h.update(t.name);
    for (auto s : t.shape) h.update(std::to_string(s) + ",");
    h.update(std::as_bytes(std::span<const double>(t.data)));
  }
  return h.hex_digest();
}

}  // namespace stancebench
