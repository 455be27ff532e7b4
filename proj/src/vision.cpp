#include "stancebench/vision.hpp"

#include <string>

#include "stancebench/error.hpp"

namespace stancebench {

PatchSequence patchify(const Image& image, int patch_size) {
  if (patch_size <= 0 || image.height % patch_size != 0 || image.width % patch_size != 0 ||
      image.height == 0 || image.width == 0) {
    throw Error(ErrorKind::PatchGridError,
                std::to_string(image.height) + "x" + std::to_string(image.width) +
                    " image is not divisible into " + std::to_string(patch_size) + "-pixel patches");
  }
  PatchSequence seq;
  seq.patch_size = patch_size;
  seq.grid_rows = image.height / patch_size;
  seq.grid_cols = image.width / patch_size;
  const int len = patch_size * patch_size * Image::kChannels;
  seq.patches.resize(static_cast<Eigen::Index>(seq.grid_rows) * seq.grid_cols, len);
  for (int gy = 0; gy < seq.grid_rows; ++gy) {
    for (int gx = 0; gx < seq.grid_cols; ++gx) {
      const Eigen::Index row = static_cast<Eigen::Index>(gy) * seq.grid_cols + gx;
      int col = 0;
      for (int y = 0; y < patch_size; ++y) {
        for (int x = 0; x < patch_size; ++x) {
          for (int c = 0; c < Image::kChannels; ++c) {
            seq.patches(row, col++) = image.at(gy * patch_size + y, gx * patch_size + x, c);
          }
        }
      }
    }
  }
  return seq;
}

void VisionConfig::validate() const {
  auto invalid = [](const std::string& m) { throw Error(ErrorKind::ConfigInvalid, "vision: " + m); };
  if (patch_size <= 0 || resolution <= 0 || resolution % patch_size != 0) {
    invalid("resolution must be a positive multiple of patch_size");
  }
  if (width <= 0 || heads <= 0 || width % heads != 0) invalid("width must be divisible by heads");
  if (layers < 0) invalid("layers must be >= 0");
  if (mlp_ratio <= 0) invalid("mlp_ratio must be positive");
}

VisionParams VisionParams::init(const VisionConfig& config, Eigen::Index fusion_width) {
  config.validate();
  Rng rng(config.seed ^ 0x5eedc0de1ULL);
  const Eigen::Index d = config.width;
  const Eigen::Index patch_len =
      static_cast<Eigen::Index>(config.patch_size) * config.patch_size * Image::kChannels;
  VisionParams p;
  p.embed = random_normal(patch_len, d, config.init_std, rng);
  p.pos = random_normal(config.patch_count() + 1, d, config.init_std, rng);
  p.cls = random_normal(1, d, config.init_std, rng);
  for (int l = 0; l < config.layers; ++l) {
    p.blocks.push_back(BlockWeights::init(d, d * config.mlp_ratio, config.init_std, rng));
  }
  p.heads = config.heads;
  p.w_proj = random_normal(d, fusion_width, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  return p;
}

Mat embed_patches(const PatchSequence& patches, const VisionParams& params) {
  const auto n = patches.patches.rows();
  if (patches.patches.cols() != params.embed.rows() || params.pos.rows() != n + 1 ||
      params.pos.cols() != params.embed.cols() || params.cls.cols() != params.embed.cols()) {
    throw Error(ErrorKind::DimensionError,
                "patch embedding: " + std::to_string(n) + " patches of length " +
                    std::to_string(patches.patches.cols()) + " vs E " +
                    std::to_string(params.embed.rows()) + "x" + std::to_string(params.embed.cols()) +
                    ", E_pos rows " + std::to_string(params.pos.rows()));
  }
  Mat v0(n + 1, params.embed.cols());
  v0.row(0) = params.cls;
  v0.bottomRows(n).noalias() = patches.patches * params.embed;
  v0 += params.pos;
  return v0;
}

Mat encode(const Mat& v0, const VisionParams& params) {
  if (!v0.allFinite()) throw Error(ErrorKind::NumericalError, "non-finite encoder input");
  Mat x = v0;
  for (const auto& block : params.blocks) {
    x = block_forward(x, block, params.heads, /*causal=*/false, {}, nullptr);
  }
  if (!x.allFinite()) throw Error(ErrorKind::NumericalError, "non-finite encoder output");
  return x;
}

Mat project(const Mat& features, const Mat& w_proj) {
  if (features.cols() != w_proj.rows()) {
    throw Error(ErrorKind::DimensionError,
                "projection: features width " + std::to_string(features.cols()) +
                    " vs W_proj rows " + std::to_string(w_proj.rows()));
  }
  return features * w_proj;
}

Mat image_features(const Image& image, const VisionConfig& config, const VisionParams& params) {
  Mat features = encode(embed_patches(patchify(image, config.patch_size), params), params);
  if (config.class_only) return features.topRows(1);
  return features;
}

}  // namespace stancebench
