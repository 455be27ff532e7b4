#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stancebench/nn.hpp"

namespace stancebench {

// H×W×3, row-major HWC, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  static constexpr int kChannels = 3;
  Image() = default;
  Image(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * kChannels) {}
  double& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * kChannels + c]; }
  double at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
};

// PNG or JPEG, converted to RGB in [0, 1].
Image load_image(const std::filesystem::path& path);
// Bilinear resize (pixel-center aligned).
Image resize_bilinear(const Image& image, int height, int width);
void save_png(const std::filesystem::path& path, const Image& image);

struct PatchSequence {
  Mat patches;  // N × (P·P·3)
  int patch_size = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  Eigen::Index count() const { return patches.rows(); }
};

// Patches in row-major grid order; each patch flattened row-major (y, x, c).
PatchSequence patchify(const Image& image, int patch_size);

struct VisionConfig {
  int resolution = 32;
  int patch_size = 4;
  int width = 32;  // encoder width D
  int layers = 1;
  int heads = 2;
  int mlp_ratio = 4;
  double init_std = 0.02;
  bool class_only = false;  // project only the class token feature
  std::uint64_t seed = 0;

  int patch_count() const { return (resolution / patch_size) * (resolution / patch_size); }
  void validate() const;
};

struct VisionParams {
  // Frozen encoder.
  Mat embed;   // (P·P·3) × D
  Mat pos;     // (N+1) × D
  RowVec cls;  // D
  std::vector<BlockWeights> blocks;
  int heads = 1;
  // Trainable projection to the fusion width.
  Mat w_proj;  // D × d_v

  static VisionParams init(const VisionConfig& config, Eigen::Index fusion_width);
};

// [x_class; x_p^1 E; ...; x_p^N E] + E_pos
Mat embed_patches(const PatchSequence& patches, const VisionParams& params);
// Pre-norm bidirectional encoder; identity when there are no blocks.
Mat encode(const Mat& v0, const VisionParams& params);
Mat project(const Mat& features, const Mat& w_proj);

// Frozen part: image -> encoder features, (N+1) × D, or 1 × D when class_only.
Mat image_features(const Image& image, const VisionConfig& config, const VisionParams& params);

}  // namespace stancebench
