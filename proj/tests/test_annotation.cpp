#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <set>
#include <thread>

#include "stancebench/annotation.hpp"
#include "stancebench/error.hpp"
#include "test_util.hpp"

using namespace stancebench;
using stancebench::testing::TempDir;

namespace {

AnnotationRecord rec(StanceLabel label, Round round, std::string who = "x") {
  AnnotationRecord r;
  r.instance_id = "i";
  r.annotator_id = std::move(who);
  r.label = label;
  r.round = round;
  return r;
}

// Plain vote count: any label held by two of the available votes wins.
std::optional<StanceLabel> vote_oracle(const std::vector<StanceLabel>& votes) {
  for (auto label : kAllLabels) {
    if (std::count(votes.begin(), votes.end(), label) >= 2) return label;
  }
  return std::nullopt;
}

// 2x2 kappa in closed form: 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)).
double kappa_oracle(double a, double b, double c, double d) {
  return 2.0 * (a * d - b * c) / ((a + b) * (b + d) + (a + c) * (c + d));
}

std::vector<LabelPair> table_pairs(int a, int b, int c, int d) {
  std::vector<LabelPair> out;
  auto push = [&](int n, StanceLabel x, StanceLabel y) {
    for (int i = 0; i < n; ++i) out.emplace_back(x, y);
  };
  push(a, StanceLabel::Against, StanceLabel::Against);
  push(b, StanceLabel::Against, StanceLabel::Favor);
  push(c, StanceLabel::Favor, StanceLabel::Against);
  push(d, StanceLabel::Favor, StanceLabel::Favor);
  return out;
}

std::vector<Instance> make_instances(int n, const std::string& group = "tesla") {
  std::vector<Instance> out;
  for (int i = 0; i < n; ++i) {
    Instance inst;
    inst.instance_id = "i" + std::to_string(100 + i);
    inst.thread_id = "t" + std::to_string(i / 2);
    inst.target_group = group;
    inst.target = "Tesla";
    inst.path = {{"p", "op", "post text", std::nullopt, 1}};
    inst.image_refs = {"a.png"};
    out.push_back(inst);
  }
  return out;
}

struct FakeClock {
  std::shared_ptr<std::atomic<long long>> seconds = std::make_shared<std::atomic<long long>>(1000);
  std::function<Timestamp()> fn() const {
    auto s = seconds;
    return [s] { return Timestamp(std::chrono::seconds(s->load())); };
  }
};

}  // namespace

TEST(MajorityVote, AllTwoAnnotatorCombinations) {
  for (auto a : kAllLabels) {
    for (auto b : kAllLabels) {
      std::vector<AnnotationRecord> rs = {rec(a, Round::First), rec(b, Round::Second)};
      const auto out = aggregate_gold(rs);
      if (a == b) {
        EXPECT_EQ(out.status, GoldStatus::Resolved);
        EXPECT_EQ(out.label, a);
      } else {
        EXPECT_EQ(out.status, GoldStatus::NeedsTieBreak);
        EXPECT_FALSE(out.label.has_value());
      }
    }
  }
}

TEST(MajorityVote, AllThreeAnnotatorCombinations) {
  for (auto a : kAllLabels) {
    for (auto b : kAllLabels) {
      for (auto c : kAllLabels) {
        std::vector<AnnotationRecord> rs = {rec(c, Round::TieBreak), rec(a, Round::First),
                                            rec(b, Round::Second)};
        const auto out = aggregate_gold(rs);
        const auto want = vote_oracle({a, b, c});
        EXPECT_EQ(out.label, want);
        EXPECT_EQ(out.status, want ? GoldStatus::Resolved : GoldStatus::Unresolved);
      }
    }
  }
}

TEST(MajorityVote, NeedsTwoInitialAnnotations) {
  std::vector<AnnotationRecord> rs = {rec(StanceLabel::Favor, Round::First),
                                      rec(StanceLabel::Favor, Round::TieBreak)};
  try {
    aggregate_gold(rs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NeedsMoreAnnotators);
  }
}

TEST(Kappa, WorkedTable) {
  EXPECT_NEAR(cohen_kappa(table_pairs(40, 10, 10, 40)), 0.6, 1e-12);
}

TEST(Kappa, MatchesClosedFormOnRandomTables) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cell(0, 60);
  int checked = 0;
  while (checked < 1000) {
    const int a = cell(rng), b = cell(rng), c = cell(rng), d = cell(rng);
    const double denom = double(a + b) * (b + d) + double(a + c) * (c + d);
    if (a + b + c + d == 0 || denom == 0) continue;
    const auto pairs = table_pairs(a, b, c, d);
    EXPECT_NEAR(cohen_kappa(pairs), kappa_oracle(a, b, c, d), 1e-9);
    std::vector<LabelPair> swapped;
    for (auto [x, y] : pairs) swapped.emplace_back(y, x);
    EXPECT_NEAR(cohen_kappa(swapped), cohen_kappa(pairs), 1e-12);
    ++checked;
  }
}

TEST(Kappa, IgnoresNonePairsAndFlagsDegenerate) {
  auto pairs = table_pairs(40, 10, 10, 40);
  pairs.emplace_back(StanceLabel::None, StanceLabel::Favor);
  pairs.emplace_back(StanceLabel::Against, StanceLabel::None);
  EXPECT_NEAR(cohen_kappa(pairs), 0.6, 1e-12);

  auto kind = [](const std::vector<LabelPair>& p) {
    try {
      cohen_kappa(p);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  EXPECT_EQ(kind({{StanceLabel::None, StanceLabel::None}}), ErrorKind::NoEligiblePairs);
  EXPECT_EQ(kind(table_pairs(5, 0, 0, 0)), ErrorKind::DegenerateMarginals);
}

TEST(Kappa, IndependentRatersNearZero) {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin(0.5);
  std::vector<LabelPair> pairs;
  for (int i = 0; i < 20000; ++i) {
    pairs.emplace_back(coin(rng) ? StanceLabel::Favor : StanceLabel::Against,
                       coin(rng) ? StanceLabel::Favor : StanceLabel::Against);
  }
  EXPECT_NEAR(cohen_kappa(pairs), 0.0, 0.03);
}

TEST(AnnotationStore, RoundsLeasesAndTieBreak) {
  TempDir dir("store");
  AnnotationStore store(make_instances(1), dir / "log.jsonl");
  auto t1 = store.next_task("ann1");
  ASSERT_TRUE(t1);
  EXPECT_EQ(t1->round, Round::First);
  EXPECT_EQ(store.next_task("ann1")->instance_id, t1->instance_id);
  auto t2 = store.next_task("ann2");
  ASSERT_TRUE(t2);
  EXPECT_EQ(t2->round, Round::Second);
  EXPECT_FALSE(store.next_task("ann3"));

  store.submit_label("ann1", "i100", StanceLabel::Favor, true);
  store.submit_label("ann2", "i100", StanceLabel::Against, false);
  EXPECT_EQ(store.gold("i100")->status, GoldStatus::NeedsTieBreak);
  EXPECT_FALSE(store.next_task("ann1"));
  auto t3 = store.next_task("ann3");
  ASSERT_TRUE(t3);
  EXPECT_EQ(t3->round, Round::TieBreak);
  store.submit_label("ann3", "i100", StanceLabel::Favor, false);
  const auto g = store.gold("i100");
  EXPECT_EQ(g->status, GoldStatus::Resolved);
  EXPECT_EQ(g->label, StanceLabel::Favor);
  EXPECT_FALSE(store.next_task("ann4"));
}

TEST(AnnotationStore, SubmitErrors) {
  AnnotationStore store(make_instances(2), {});
  auto kind = [&](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  EXPECT_EQ(kind([&] { store.submit_label("a", "nope", StanceLabel::Favor, false); }),
            ErrorKind::UnknownInstance);
  EXPECT_EQ(kind([&] { store.submit_label("a", "i100", StanceLabel::Favor, false); }),
            ErrorKind::LeaseInvalid);
  const auto t = store.next_task("a");
  store.submit_label("a", t->instance_id, StanceLabel::Favor, false);
  EXPECT_EQ(kind([&] { store.submit_label("a", t->instance_id, StanceLabel::None, false); }),
            ErrorKind::AlreadyLabeled);
}

TEST(AnnotationStore, ExpiredLeaseIsReissued) {
  FakeClock clock;
  AnnotationStoreOptions opts;
  opts.lease_duration = std::chrono::seconds(60);
  opts.clock = clock.fn();
  AnnotationStore store(make_instances(1), {}, opts);
  ASSERT_EQ(store.next_task("slow")->round, Round::First);
  EXPECT_EQ(store.next_task("fast")->round, Round::Second);
  *clock.seconds += 61;
  const auto t = store.next_task("fast");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->round, Round::First);
  try {
    store.submit_label("slow", "i100", StanceLabel::Favor, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LeaseInvalid);
  }
  store.submit_label("fast", "i100", StanceLabel::Favor, false);
  EXPECT_EQ(store.records_for("i100").front().round, Round::First);
}

TEST(AnnotationStore, ConcurrentAnnotatorsNeverDoubleBook) {
  TempDir dir("concurrent");
  const int n = 40;
  AnnotationStore store(make_instances(n), dir / "log.jsonl");
  std::vector<std::thread> workers;
  for (int w = 0; w < 16; ++w) {
    workers.emplace_back([&store, w] {
      const std::string me = "w" + std::to_string(w);
      while (auto task = store.next_task(me)) {
        store.submit_label(me, task->instance_id, kAllLabels[static_cast<std::size_t>(w % 2)],
                           w % 3 == 0);
      }
    });
  }
  for (auto& t : workers) t.join();

  for (int i = 0; i < n; ++i) {
    const auto rs = store.records_for("i" + std::to_string(100 + i));
    std::set<std::string> who;
    std::multiset<Round> rounds;
    for (const auto& r : rs) {
      who.insert(r.annotator_id);
      rounds.insert(r.round);
    }
    EXPECT_EQ(who.size(), rs.size());
    EXPECT_EQ(rounds.count(Round::First), 1u);
    EXPECT_EQ(rounds.count(Round::Second), 1u);
    EXPECT_LE(rounds.count(Round::TieBreak), 1u);
    EXPECT_NE(store.gold(rs.front().instance_id)->status, GoldStatus::Pending);
  }
  EXPECT_EQ(read_record_log(dir / "log.jsonl").size(), store.record_count());

  AnnotationStore replayed(make_instances(n), dir / "log.jsonl");
  EXPECT_EQ(replayed.record_count(), store.record_count());
  EXPECT_EQ(replayed.progress().resolved, store.progress().resolved);
}

TEST(AnnotationStore, ProgressAndAgreement) {
  AnnotationStore store(make_instances(4), {});
  const StanceLabel first[] = {StanceLabel::Favor, StanceLabel::Favor, StanceLabel::Against,
                               StanceLabel::Against};
  const StanceLabel second[] = {StanceLabel::Favor, StanceLabel::Against, StanceLabel::Against,
                                StanceLabel::None};
  for (int i = 0; i < 4; ++i) {
    const std::string id = "i" + std::to_string(100 + i);
    ASSERT_EQ(store.next_task("a")->instance_id, id);
    store.submit_label("a", id, first[i], false);
    ASSERT_EQ(store.next_task("b")->instance_id, id);
    store.submit_label("b", id, second[i], false);
  }
  const auto p = store.progress();
  EXPECT_EQ(p.resolved, 2u);
  EXPECT_EQ(p.awaiting_tie_break, 2u);
  EXPECT_EQ(p.per_annotator.at("a"), 4u);
  const auto ag = store.agreement().per_target.at("tesla");
  EXPECT_EQ(ag.counted_pairs, 3u);
  EXPECT_EQ(ag.resolved, 2u);
  EXPECT_EQ(ag.pending, 2u);
  ASSERT_TRUE(ag.kappa);
  EXPECT_NEAR(*ag.kappa, kappa_oracle(1, 0, 1, 1), 1e-12);
}

TEST(AnnotationMerge, GoldAndVisionMajority) {
  auto insts = make_instances(2);
  std::vector<AnnotationRecord> rs;
  auto add = [&](const std::string& id, StanceLabel l, Round r, bool v) {
    AnnotationRecord x = rec(l, r, "a" + std::to_string(rs.size()));
    x.instance_id = id;
    x.vision_related = v;
    rs.push_back(x);
  };
  add("i100", StanceLabel::Favor, Round::First, true);
  add("i100", StanceLabel::Against, Round::Second, false);
  add("i100", StanceLabel::Favor, Round::TieBreak, false);
  add("i101", StanceLabel::None, Round::First, false);
  add("i101", StanceLabel::None, Round::Second, false);
  merge_annotations(insts, rs);
  EXPECT_EQ(insts[0].gold, StanceLabel::Favor);
  EXPECT_EQ(insts[0].vision_related, true);
  EXPECT_EQ(insts[1].gold, StanceLabel::None);
  EXPECT_EQ(insts[1].vision_related, false);
}

TEST(AnnotationLog, RecordRoundTrip) {
  AnnotationRecord r = rec(StanceLabel::Against, Round::TieBreak, "z");
  r.submitted_at = Timestamp(std::chrono::milliseconds(123456));
  r.vision_related = true;
  const auto back = parse_record_line(record_to_json_line(r), 1);
  EXPECT_EQ(record_to_json_line(back), record_to_json_line(r));
  EXPECT_THROW(parse_record_line(R"({"instance_id":"i"})", 2), Error);
}
