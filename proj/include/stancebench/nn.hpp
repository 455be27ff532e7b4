#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace stancebench {

// Row-major so a sequence is one row per token and projections read x·W.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

using Rng = std::mt19937_64;

Mat random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);
bool all_finite(const Mat& m);

struct LayerNormWeights {
  RowVec gamma;
  RowVec beta;
  static LayerNormWeights identity(Eigen::Index width);
};

// Low-rank adapter on a square projection: y = x·(W + scale·B·A).
// A is r×d, B is d×r; B starts at zero so the initial delta vanishes.
struct LoraAdapter {
  Mat a;
  Mat b;
  double scale = 1.0;

  static LoraAdapter init(Eigen::Index width, Eigen::Index rank, double alpha, double a_std,
                          Rng& rng);
  Eigen::Index rank() const { return a.rows(); }
  // Dense delta scale·B·A.
  Mat delta() const { return scale * (b * a); }
};

// x·W + scale·(x·B)·A without forming the dense delta.
Mat lora_apply(const Mat& w, const LoraAdapter& adapter, const Mat& x);

// Pre-norm transformer block: x + Attn(LN1(x)), then + MLP(LN2(.)).
struct BlockWeights {
  LayerNormWeights ln1;
  Mat wq, wk, wv, wo;
  LayerNormWeights ln2;
  Mat w1;
  RowVec b1;
  Mat w2;
  RowVec b2;

  static BlockWeights init(Eigen::Index width, Eigen::Index hidden, double stddev, Rng& rng);
};

struct BlockAdapters {
  const LoraAdapter* q = nullptr;
  const LoraAdapter* v = nullptr;
};

// Activations kept for the backward pass.
struct BlockCache {
  Mat x_in;
  Mat ln1_xhat;
  Eigen::VectorXd ln1_rstd;
  Mat a;  // LN1 output
  Mat q, k, v;
  Mat uq, uv;  // a·B for the q / v adapters
  std::vector<Mat> probs;  // per head, T×T
  Mat attn;  // concatenated head outputs, T×d
  Mat x_mid;
  Mat ln2_xhat;
  Eigen::VectorXd ln2_rstd;
  Mat m;  // LN2 output
  Mat h1;  // pre-activation
  Mat g;   // GELU(h1)
};

struct BlockAdapterGrads {
  Mat dqa, dqb, dva, dvb;
  void resize_like(const BlockAdapters& adapters);
};

Mat layer_norm(const Mat& x, const LayerNormWeights& w, Mat* xhat = nullptr,
               Eigen::VectorXd* rstd = nullptr);
Mat layer_norm_backward(const Mat& dy, const LayerNormWeights& w, const Mat& xhat,
                        const Eigen::VectorXd& rstd);

Mat block_forward(const Mat& x, const BlockWeights& w, int heads, bool causal,
                  const BlockAdapters& adapters, BlockCache* cache);

// Returns dL/dx. Accumulates adapter gradients into `grads` when adapters are set.
Mat block_backward(const Mat& dy, const BlockWeights& w, int heads, bool causal,
                   const BlockAdapters& adapters, const BlockCache& cache,
                   BlockAdapterGrads* grads);

}  // namespace stancebench
