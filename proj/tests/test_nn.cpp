#include <gtest/gtest.h>

#include <cstring>

#include "stancebench/error.hpp"
#include "stancebench/nn.hpp"

using namespace stancebench;

namespace {

// Scalar objective sum(out ⊙ probe) so the backward seed is `probe`.
double objective(const Mat& out, const Mat& probe) { return out.cwiseProduct(probe).sum(); }

double rel_err(const Mat& a, const Mat& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / denom;
}

template <typename F>
Mat numeric_grad(Mat& param, F&& f, double eps = 1e-5) {
  Mat g(param.rows(), param.cols());
  for (Eigen::Index i = 0; i < param.size(); ++i) {
    const double keep = param.data()[i];
    param.data()[i] = keep + eps;
    const double up = f();
    param.data()[i] = keep - eps;
    const double down = f();
    param.data()[i] = keep;
    g.data()[i] = (up - down) / (2 * eps);
  }
  return g;
}

struct BlockFixture {
  Rng rng{17};
  BlockWeights w = BlockWeights::init(8, 16, 0.3, rng);
  LoraAdapter q = LoraAdapter::init(8, 2, 4.0, 0.5, rng);
  LoraAdapter v = LoraAdapter::init(8, 2, 4.0, 0.5, rng);
  Mat x = random_normal(5, 8, 1.0, rng);
  Mat probe = random_normal(5, 8, 1.0, rng);

  BlockFixture() {
    q.b = random_normal(8, 2, 0.5, rng);
    v.b = random_normal(8, 2, 0.5, rng);
    w.ln1.gamma = RowVec::Ones(8) + 0.1 * random_normal(1, 8, 1.0, rng);
    w.b1 = 0.1 * random_normal(1, 16, 1.0, rng);
  }
  BlockAdapters adapters() const { return {&q, &v}; }
  double loss() { return objective(block_forward(x, w, 2, true, adapters(), nullptr), probe); }
};

}  // namespace

TEST(Lora, ZeroInitIsBitIdentical) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat w = random_normal(12, 12, 0.2, rng);
    const Mat x = random_normal(7, 12, 1.0, rng);
    const auto ad = LoraAdapter::init(12, 3, 6.0, 0.3, rng);
    const Mat base = x * w;
    const Mat out = lora_apply(w, ad, x);
    EXPECT_EQ(std::memcmp(base.data(), out.data(), sizeof(double) * base.size()), 0);
  }
}

TEST(Lora, FactoredMatchesDense) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat w = random_normal(10, 10, 0.2, rng);
    const Mat x = random_normal(4, 10, 1.0, rng);
    auto ad = LoraAdapter::init(10, 1 + trial % 10, 2.0 + trial % 3, 0.3, rng);
    ad.b = random_normal(10, ad.rank(), 0.3, rng);
    const Mat dense = x * (w + ad.delta());
    EXPECT_LT((lora_apply(w, ad, x) - dense).cwiseAbs().maxCoeff(), 1e-10);
  }
  LoraAdapter bad = LoraAdapter::init(10, 2, 2.0, 0.3, rng);
  EXPECT_THROW(lora_apply(Mat::Zero(8, 8), bad, Mat::Zero(1, 8)), Error);
}

TEST(LayerNorm, BackwardMatchesFiniteDifference) {
  Rng rng(3);
  Mat x = random_normal(3, 6, 1.0, rng);
  LayerNormWeights w{RowVec::Ones(6) + random_normal(1, 6, 0.2, rng), random_normal(1, 6, 0.2, rng)};
  const Mat probe = random_normal(3, 6, 1.0, rng);
  Mat xhat;
  Eigen::VectorXd rstd;
  layer_norm(x, w, &xhat, &rstd);
  const Mat dx = layer_norm_backward(probe, w, xhat, rstd);
  const Mat fd = numeric_grad(x, [&] { return objective(layer_norm(x, w), probe); });
  EXPECT_LT(rel_err(dx, fd), 1e-7);
}

TEST(Block, BackwardMatchesFiniteDifference) {
  BlockFixture f;
  BlockCache cache;
  block_forward(f.x, f.w, 2, true, f.adapters(), &cache);
  BlockAdapterGrads g;
  g.resize_like(f.adapters());
  const Mat dx = block_backward(f.probe, f.w, 2, true, f.adapters(), cache, &g);

  EXPECT_LT(rel_err(dx, numeric_grad(f.x, [&] { return f.loss(); })), 1e-6);
  EXPECT_LT(rel_err(g.dqa, numeric_grad(f.q.a, [&] { return f.loss(); })), 1e-6);
  EXPECT_LT(rel_err(g.dqb, numeric_grad(f.q.b, [&] { return f.loss(); })), 1e-6);
  EXPECT_LT(rel_err(g.dva, numeric_grad(f.v.a, [&] { return f.loss(); })), 1e-6);
  EXPECT_LT(rel_err(g.dvb, numeric_grad(f.v.b, [&] { return f.loss(); })), 1e-6);
}

TEST(Block, CausalMaskHidesFuture) {
  BlockFixture f;
  const Mat y = block_forward(f.x, f.w, 2, true, f.adapters(), nullptr);
  Mat x2 = f.x;
  x2.row(4).setConstant(3.0);
  const Mat y2 = block_forward(x2, f.w, 2, true, f.adapters(), nullptr);
  EXPECT_EQ(y.topRows(4), y2.topRows(4));
  EXPECT_NE(y.row(4), y2.row(4));

  const Mat b = block_forward(f.x, f.w, 2, false, {}, nullptr);
  const Mat b2 = block_forward(x2, f.w, 2, false, {}, nullptr);
  EXPECT_GT((b.topRows(4) - b2.topRows(4)).norm(), 0.0);
}

TEST(Block, RejectsBadShapes) {
  BlockFixture f;
  EXPECT_THROW(block_forward(Mat::Zero(3, 7), f.w, 2, true, {}, nullptr), Error);
  EXPECT_THROW(block_forward(f.x, f.w, 3, true, {}, nullptr), Error);
}
