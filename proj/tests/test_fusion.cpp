#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "stancebench/checkpoint.hpp"
#include "stancebench/error.hpp"
#include "stancebench/fusion.hpp"
#include "test_util.hpp"

using namespace stancebench;
using stancebench::testing::TempDir;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.d_model = 16;
  c.layers = 2;
  c.heads = 2;
  c.lora_rank = 4;
  c.lora_alpha = 8;
  c.max_len = 96;
  c.seed = 21;
  return c;
}

VisionConfig small_vision() {
  VisionConfig v;
  v.resolution = 8;
  v.patch_size = 4;
  v.width = 8;
  v.layers = 1;
  v.heads = 2;
  v.seed = 4;
  return v;
}

std::vector<int> bytes(std::string_view s) {
  std::vector<int> out;
  for (unsigned char c : s) out.push_back(c);
  return out;
}

TrainExample make_example(std::uint64_t seed, StanceLabel label, int visual_rows = 5) {
  Rng rng(seed);
  TrainExample ex;
  ex.visual_prefix = bytes("img:");
  ex.features = random_normal(visual_rows, 8, 1.0, rng);
  ex.text = bytes("stance of u" + std::to_string(seed % 10) + "?");
  ex.answer = answer_tokens(label);
  return ex;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::IoError;
}

double group_rel_err(const Mat& analytic, const Mat& numeric) {
  const double denom = std::max({analytic.norm(), numeric.norm(), 1e-300});
  return (analytic - numeric).norm() / denom;
}

template <typename F>
Mat finite_difference(Mat& param, F&& loss, double eps = 1e-5) {
  Mat g(param.rows(), param.cols());
  for (Eigen::Index i = 0; i < param.size(); ++i) {
    const double keep = param.data()[i];
    param.data()[i] = keep + eps;
    const double up = loss();
    param.data()[i] = keep - eps;
    const double down = loss();
    param.data()[i] = keep;
    g.data()[i] = (up - down) / (2 * eps);
  }
  return g;
}

}  // namespace

TEST(Assemble, LayoutOfWorkedExample) {
  ModelConfig c = small_config();
  Rng rng(1);
  const Mat visual = random_normal(5, 16, 1.0, rng);
  const auto in = assemble_input(bytes("pv"), visual, bytes("0123456789"), c);
  EXPECT_EQ(in.length(), 21u);
  const auto& v = in.segment(SegmentKind::Visual);
  EXPECT_EQ(v.begin, 4u);
  EXPECT_EQ(v.end, 9u);
  EXPECT_EQ(in.tokens[0], token_id(Marker::Inst));
  EXPECT_EQ(in.tokens[3], token_id(Marker::ImgBegin));
  EXPECT_EQ(in.tokens[9], token_id(Marker::ImgEnd));
  EXPECT_EQ(in.tokens[20], token_id(Marker::InstEnd));
  for (std::size_t i = 4; i < 9; ++i) EXPECT_EQ(in.tokens[i], kVisualSlot);
  EXPECT_EQ(in.visual_prefix_tokens(), bytes("pv"));
  EXPECT_EQ(in.text_tokens(), bytes("0123456789"));
  EXPECT_EQ(in.visual_rows(), visual);

  const auto with = with_answer(in, answer_tokens(StanceLabel::Favor), c);
  EXPECT_EQ(with.segment(SegmentKind::AnswerStart).begin, 21u);
  EXPECT_EQ(with.tokens[21], token_id(Marker::AnswerStart));
  EXPECT_EQ(with.answer_tokens(), answer_tokens(StanceLabel::Favor));
  EXPECT_EQ(with.tokens.back(), kStopToken);
}

TEST(Assemble, EmptyVisualAndErrors) {
  ModelConfig c = small_config();
  const auto in = assemble_input(bytes("p"), Mat(0, 16), bytes("t"), c);
  EXPECT_EQ(in.length(), 6u);
  EXPECT_EQ(in.segment(SegmentKind::Visual).size(), 0u);
  EXPECT_EQ(in.segment(SegmentKind::ImgEnd).begin, in.segment(SegmentKind::ImgBegin).end);

  EXPECT_EQ(kind_of([&] { assemble_input(bytes("p"), Mat::Zero(2, 7), bytes("t"), c); }),
            ErrorKind::DimensionError);
  EXPECT_EQ(kind_of([&] { assemble_input(bytes("p"), Mat(0, 16), std::vector<int>(93, 'x'), c); }),
            ErrorKind::SequenceTooLong);
  EXPECT_EQ(kind_of([&] { assemble_input(std::vector<int>{300}, Mat(0, 16), bytes("t"), c); }),
            ErrorKind::TokenOutOfRange);
  try {
    assemble_input(bytes("p"), Mat(0, 16), std::vector<int>(93, 'x'), c);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("98"), std::string::npos) << e.what();
  }
}

TEST(Model, ConfigValidation) {
  ModelConfig c = small_config();
  c.lora_rank = 17;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::ConfigInvalid);
  c = small_config();
  c.heads = 3;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::ConfigInvalid);
  c = small_config();
  c.lora_rank = 0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::ConfigInvalid);
}

TEST(Model, InitIsDeterministicAndAdaptersStartNeutral) {
  const auto a = MultimodalModel::init(small_config(), small_vision());
  const auto b = MultimodalModel::init(small_config(), small_vision());
  EXPECT_EQ(a.frozen_hash(), b.frozen_hash());
  EXPECT_EQ(a.trainable_hash(), b.trainable_hash());
  for (const auto& ad : a.adapters) {
    EXPECT_TRUE(ad.q.b.isZero(0));
    EXPECT_TRUE(ad.v.b.isZero(0));
  }

  const auto in = example_input(make_example(3, StanceLabel::Against), a);
  auto off = a;
  off.adapters_enabled = false;
  const Mat on_logits = forward(in, a);
  const Mat off_logits = forward(in, off);
  ASSERT_EQ(on_logits.size(), off_logits.size());
  EXPECT_EQ(std::memcmp(on_logits.data(), off_logits.data(), sizeof(double) * on_logits.size()), 0);
  EXPECT_EQ(on_logits.cols(), kVocabularySize);
}

TEST(Model, DecoderIsCausal) {
  const auto m = MultimodalModel::init(small_config(), small_vision());
  auto in = example_input(make_example(5, StanceLabel::Favor), m);
  const Mat base = forward(in, m);
  const std::size_t p = in.segment(SegmentKind::Text).begin + 3;
  in.tokens[p] = 'Z';
  const Mat changed = forward(in, m);
  const auto rows = static_cast<Eigen::Index>(p);
  EXPECT_EQ(base.topRows(rows), changed.topRows(rows));
  EXPECT_GT((base.bottomRows(base.rows() - rows) - changed.bottomRows(base.rows() - rows)).norm(), 0.0);
}

TEST(Model, GradientsMatchFiniteDifferences) {
  auto m = MultimodalModel::init(small_config(), small_vision());
  Rng rng(9);
  for (auto& ad : m.adapters) {
    ad.q.b = random_normal(ad.q.b.rows(), ad.q.b.cols(), 0.1, rng);
    ad.v.b = random_normal(ad.v.b.rows(), ad.v.b.cols(), 0.1, rng);
  }
  const std::vector<TrainExample> batch = {make_example(1, StanceLabel::Favor),
                                           make_example(2, StanceLabel::None, 0)};
  ModelGradients g;
  loss_and_gradients(batch, m, &g);
  auto loss = [&] { return loss_and_gradients(batch, m, nullptr); };

  for (std::size_t l = 0; l < m.adapters.size(); ++l) {
    EXPECT_LT(group_rel_err(g.adapters[l].dqa, finite_difference(m.adapters[l].q.a, loss)), 1e-4);
    EXPECT_LT(group_rel_err(g.adapters[l].dqb, finite_difference(m.adapters[l].q.b, loss)), 1e-4);
    EXPECT_LT(group_rel_err(g.adapters[l].dva, finite_difference(m.adapters[l].v.a, loss)), 1e-4);
    EXPECT_LT(group_rel_err(g.adapters[l].dvb, finite_difference(m.adapters[l].v.b, loss)), 1e-4);
  }
  EXPECT_LT(group_rel_err(g.w_proj, finite_difference(m.vision.w_proj, loss)), 1e-4);
  EXPECT_LT(group_rel_err(g.marker_emb, finite_difference(m.marker_emb, loss)), 1e-4);
}

TEST(Model, NoTargetTokens) {
  const auto m = MultimodalModel::init(small_config(), small_vision());
  TrainExample ex = make_example(1, StanceLabel::Favor);
  ex.answer.clear();
  const std::vector<TrainExample> batch = {ex};
  EXPECT_EQ(kind_of([&] { loss_and_gradients(batch, m, nullptr); }), ErrorKind::NoTargetTokens);
}

TEST(Training, FrozenWeightsUnchangedAndLossFalls) {
  auto m = MultimodalModel::init(small_config(), small_vision());
  const auto frozen = m.frozen_hash();
  const auto trainable = m.trainable_hash();
  const std::vector<TrainExample> batch = {make_example(1, StanceLabel::Favor),
                                           make_example(2, StanceLabel::Against)};
  auto state = init_train_state(m);
  OptimizerConfig opt;
  opt.lr = 1e-2;
  for (int step = 0; step < 100; ++step) train_step(batch, m, state, opt);
  EXPECT_EQ(m.frozen_hash(), frozen);
  EXPECT_NE(m.trainable_hash(), trainable);
  ASSERT_EQ(state.loss_history.size(), 100u);
  EXPECT_LT(state.loss_history.back(), 0.5 * state.loss_history.front());
  EXPECT_EQ(state.step, 100u);
}

TEST(Generate, StopsAndRespectsBudget) {
  const auto m = MultimodalModel::init(small_config(), small_vision());
  const auto in = example_input(make_example(1, StanceLabel::Favor), m);
  EXPECT_EQ(generate(in, m, 0), "");
  const auto out = generate(in, m, 5);
  EXPECT_LE(out.size(), 5u * 8);
  EXPECT_EQ(generate(in, m, 5), out);
}

TEST(MatchLabel, Examples) {
  auto check = [](std::string_view text, StanceLabel label, MatchMethod method) {
    const auto p = match_label(text);
    EXPECT_EQ(p.matched, label) << text;
    EXPECT_EQ(p.method, method) << text;
    EXPECT_EQ(p.generated_text, text);
  };
  check("favor", StanceLabel::Favor, MatchMethod::Exact);
  check("The stance is AGAINST.", StanceLabel::Against, MatchMethod::Exact);
  check("none of them, favor", StanceLabel::None, MatchMethod::Exact);
  check("favorable against", StanceLabel::Against, MatchMethod::Exact);
  check("againts", StanceLabel::Against, MatchMethod::EditDistance);
  check("favr", StanceLabel::Favor, MatchMethod::EditDistance);
  check("nnoe", StanceLabel::None, MatchMethod::EditDistance);
  check("", StanceLabel::None, MatchMethod::Fallback);
  check(" \n\t", StanceLabel::None, MatchMethod::Fallback);
  EXPECT_EQ(edit_distance("againts", "against"), 1);
  EXPECT_EQ(edit_distance("", "none"), 4);
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3);
}

TEST(MatchLabel, TotalOnArbitraryBytes) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s(static_cast<std::size_t>(rng() % 24), '\0');
    for (auto& c : s) c = static_cast<char>(rng() & 0xff);
    Prediction p;
    ASSERT_NO_THROW(p = match_label(s));
    EXPECT_TRUE(p.matched == StanceLabel::Against || p.matched == StanceLabel::Favor ||
                p.matched == StanceLabel::None);
  }
}

TEST(Checkpoint, RoundTripPreservesModel) {
  TempDir dir("ckpt");
  auto m = MultimodalModel::init(small_config(), small_vision());
  Rng rng(2);
  m.adapters[0].q.b = random_normal(16, 4, 0.1, rng);
  m.to_tensors().save(dir / "m.ckpt");
  const auto back = MultimodalModel::from_tensors(TensorStore::load(dir / "m.ckpt"), small_config(),
                                                  small_vision());
  EXPECT_EQ(back.frozen_hash(), m.frozen_hash());
  EXPECT_EQ(back.trainable_hash(), m.trainable_hash());
  const auto in = example_input(make_example(7, StanceLabel::None), m);
  EXPECT_EQ(forward(in, back), forward(in, m));

  stancebench::testing::write_file(dir / "bad.ckpt", "SBCKPT01garbage");
  EXPECT_EQ(kind_of([&] { TensorStore::load(dir / "bad.ckpt"); }), ErrorKind::CheckpointError);
  ModelConfig other = small_config();
  other.d_model = 32;
  EXPECT_THROW(MultimodalModel::from_tensors(TensorStore::load(dir / "m.ckpt"), other, small_vision()),
               Error);
}
