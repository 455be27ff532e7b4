#include "stancebench/nn.hpp"

#include <cmath>
#include <limits>

#include "stancebench/error.hpp"

namespace stancebench {

namespace {

constexpr double kLayerNormEps = 1e-5;
const double kGeluC = std::sqrt(2.0 / M_PI);

double gelu(double x) {
  const double t = std::tanh(kGeluC * (x + 0.044715 * x * x * x));
  return 0.5 * x * (1.0 + t);
}

double gelu_grad(double x) {
  const double t = std::tanh(kGeluC * (x + 0.044715 * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
}

void check_shapes(const Mat& x, const BlockWeights& w, int heads) {
  const auto d = w.wq.rows();
  if (x.cols() != d || heads <= 0 || d % heads != 0) {
    throw Error(ErrorKind::DimensionError,
                "block input width " + std::to_string(x.cols()) + " vs weights " +
                    std::to_string(d) + " with " + std::to_string(heads) + " heads");
  }
}

}  // namespace

Mat random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

LayerNormWeights LayerNormWeights::identity(Eigen::Index width) {
  return {RowVec::Ones(width), RowVec::Zero(width)};
}

LoraAdapter LoraAdapter::init(Eigen::Index width, Eigen::Index rank, double alpha, double a_std,
                              Rng& rng) {
  LoraAdapter ad;
  ad.a = random_normal(rank, width, a_std, rng);
  ad.b = Mat::Zero(width, rank);
  ad.scale = alpha / static_cast<double>(rank);
  return ad;
}

Mat lora_apply(const Mat& w, const LoraAdapter& adapter, const Mat& x) {
  if (x.cols() != w.rows() || adapter.b.rows() != w.rows() || adapter.a.cols() != w.cols() ||
      adapter.a.rows() != adapter.b.cols()) {
    throw Error(ErrorKind::DimensionError, "lora_apply: inconsistent shapes");
  }
  Mat out = x * w;
  out.noalias() += adapter.scale * ((x * adapter.b) * adapter.a);
  return out;
}

BlockWeights BlockWeights::init(Eigen::Index width, Eigen::Index hidden, double stddev, Rng& rng) {
  BlockWeights w;
  w.ln1 = LayerNormWeights::identity(width);
  w.wq = random_normal(width, width, stddev, rng);
  w.wk = random_normal(width, width, stddev, rng);
  w.wv = random_normal(width, width, stddev, rng);
  w.wo = random_normal(width, width, stddev, rng);
  w.ln2 = LayerNormWeights::identity(width);
  w.w1 = random_normal(width, hidden, stddev, rng);
  w.b1 = RowVec::Zero(hidden);
  w.w2 = random_normal(hidden, width, stddev, rng);
  w.b2 = RowVec::Zero(width);
  return w;
}

void BlockAdapterGrads::resize_like(const BlockAdapters& adapters) {
  if (adapters.q != nullptr) {
    dqa = Mat::Zero(adapters.q->a.rows(), adapters.q->a.cols());
    dqb = Mat::Zero(adapters.q->b.rows(), adapters.q->b.cols());
  }
  if (adapters.v != nullptr) {
    dva = Mat::Zero(adapters.v->a.rows(), adapters.v->a.cols());
    dvb = Mat::Zero(adapters.v->b.rows(), adapters.v->b.cols());
  }
}

Mat layer_norm(const Mat& x, const LayerNormWeights& w, Mat* xhat_out,
               Eigen::VectorXd* rstd_out) {
  const auto rows = x.rows();
  const auto d = static_cast<double>(x.cols());
  Mat xhat(rows, x.cols());
  Eigen::VectorXd rstd(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).sum() / d;
    const auto centered = x.row(i).array() - mean;
    const double var = centered.square().sum() / d;
    rstd(i) = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(i) = centered * rstd(i);
  }
  Mat y = (xhat.array().rowwise() * w.gamma.array()).rowwise() + w.beta.array();
  if (xhat_out != nullptr) *xhat_out = std::move(xhat);
  if (rstd_out != nullptr) *rstd_out = std::move(rstd);
  return y;
}

Mat layer_norm_backward(const Mat& dy, const LayerNormWeights& w, const Mat& xhat,
                        const Eigen::VectorXd& rstd) {
  const auto d = static_cast<double>(dy.cols());
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const RowVec dxhat = dy.row(i).cwiseProduct(w.gamma);
    const double mean_d = dxhat.sum() / d;
    const double mean_dx = dxhat.cwiseProduct(xhat.row(i)).sum() / d;
    dx.row(i) = rstd(i) * (dxhat.array() - mean_d - xhat.row(i).array() * mean_dx);
  }
  return dx;
}

Mat block_forward(const Mat& x, const BlockWeights& w, int heads, bool causal,
                  const BlockAdapters& adapters, BlockCache* cache) {
  check_shapes(x, w, heads);
  const auto t = x.rows();
  const auto d = x.cols();
  const auto dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Mat ln1_xhat;
  Eigen::VectorXd ln1_rstd;
  Mat a = layer_norm(x, w.ln1, &ln1_xhat, &ln1_rstd);

  Mat q = a * w.wq;
  Mat k = a * w.wk;
  Mat v = a * w.wv;
  Mat uq, uv;
  if (adapters.q != nullptr) {
    uq = a * adapters.q->b;
    q.noalias() += adapters.q->scale * (uq * adapters.q->a);
  }
  if (adapters.v != nullptr) {
    uv = a * adapters.v->b;
    v.noalias() += adapters.v->scale * (uv * adapters.v->a);
  }

  Mat attn(t, d);
  std::vector<Mat> probs;
  probs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const auto qh = q.middleCols(h * dh, dh);
    const auto kh = k.middleCols(h * dh, dh);
    const auto vh = v.middleCols(h * dh, dh);
    Mat s = (qh * kh.transpose()) * scale;
    for (Eigen::Index i = 0; i < t; ++i) {
      const Eigen::Index visible = causal ? i + 1 : t;
      const double mx = s.row(i).head(visible).maxCoeff();
      double z = 0.0;
      for (Eigen::Index j = 0; j < visible; ++j) {
        s(i, j) = std::exp(s(i, j) - mx);
        z += s(i, j);
      }
      s.row(i).head(visible) /= z;
      if (visible < t) s.row(i).tail(t - visible).setZero();
    }
    attn.middleCols(h * dh, dh).noalias() = s * vh;
    probs.push_back(std::move(s));
  }

  Mat x_mid = x + attn * w.wo;

  Mat ln2_xhat;
  Eigen::VectorXd ln2_rstd;
  Mat m = layer_norm(x_mid, w.ln2, &ln2_xhat, &ln2_rstd);
  Mat h1 = (m * w.w1).rowwise() + w.b1;
  Mat g = h1.unaryExpr([](double z) { return gelu(z); });
  Mat out = x_mid + ((g * w.w2).rowwise() + w.b2);

  if (cache != nullptr) {
    cache->x_in = x;
    cache->ln1_xhat = std::move(ln1_xhat);
    cache->ln1_rstd = std::move(ln1_rstd);
    cache->a = std::move(a);
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->uq = std::move(uq);
    cache->uv = std::move(uv);
    cache->probs = std::move(probs);
    cache->attn = std::move(attn);
    cache->x_mid = std::move(x_mid);
    cache->ln2_xhat = std::move(ln2_xhat);
    cache->ln2_rstd = std::move(ln2_rstd);
    cache->m = std::move(m);
    cache->h1 = std::move(h1);
    cache->g = std::move(g);
  }
  return out;
}

Mat block_backward(const Mat& dy, const BlockWeights& w, int heads, bool causal,
                   const BlockAdapters& adapters, const BlockCache& c, BlockAdapterGrads* grads) {
  (void)causal;
  const auto d = dy.cols();
  const auto dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // MLP branch.
  Mat dg = dy * w.w2.transpose();
  Mat dh1 = dg.cwiseProduct(c.h1.unaryExpr([](double z) { return gelu_grad(z); }));
  Mat dm = dh1 * w.w1.transpose();
  Mat dx_mid = dy + layer_norm_backward(dm, w.ln2, c.ln2_xhat, c.ln2_rstd);

  // Attention branch.
  Mat dattn = dx_mid * w.wo.transpose();
  Mat dq(dy.rows(), d), dk(dy.rows(), d), dv(dy.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Mat& p = c.probs[static_cast<std::size_t>(h)];
    const auto doh = dattn.middleCols(h * dh, dh);
    const auto qh = c.q.middleCols(h * dh, dh);
    const auto kh = c.k.middleCols(h * dh, dh);
    const auto vh = c.v.middleCols(h * dh, dh);
    Mat dp = doh * vh.transpose();
    dv.middleCols(h * dh, dh).noalias() = p.transpose() * doh;
    const Eigen::VectorXd row_dot = dp.cwiseProduct(p).rowwise().sum();
    Mat ds = p.cwiseProduct(dp.colwise() - row_dot) * scale;
    dq.middleCols(h * dh, dh).noalias() = ds * kh;
    dk.middleCols(h * dh, dh).noalias() = ds.transpose() * qh;
  }

  Mat da = dq * w.wq.transpose() + dk * w.wk.transpose() + dv * w.wv.transpose();
  if (adapters.q != nullptr) {
    const LoraAdapter& ad = *adapters.q;
    if (grads != nullptr) grads->dqa.noalias() += ad.scale * (c.uq.transpose() * dq);
    Mat du = ad.scale * (dq * ad.a.transpose());
    if (grads != nullptr) grads->dqb.noalias() += c.a.transpose() * du;
    da.noalias() += du * ad.b.transpose();
  }
  if (adapters.v != nullptr) {
    const LoraAdapter& ad = *adapters.v;
    if (grads != nullptr) grads->dva.noalias() += ad.scale * (c.uv.transpose() * dv);
    Mat du = ad.scale * (dv * ad.a.transpose());
    if (grads != nullptr) grads->dvb.noalias() += c.a.transpose() * du;
    da.noalias() += du * ad.b.transpose();
  }
  return dx_mid + layer_norm_backward(da, w.ln1, c.ln1_xhat, c.ln1_rstd);
}

}  // namespace stancebench
