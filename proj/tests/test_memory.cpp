#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "farlab/memory/far_curiosity.hpp"
#include "farlab/memory/long_term_memory.hpp"
#include "farlab/rng.hpp"

using namespace farlab;
using namespace farlab::memory;

namespace {

FragmentEntry entry(std::int64_t id, std::vector<double> key, std::int64_t last_used) {
  FragmentEntry e;
  e.id = id;
  e.key = std::move(key);
  e.module = curiosity::RndModule::create(curiosity::RndConfig{2, 3, 4}, static_cast<std::uint64_t>(id));
  e.last_used = last_used;
  return e;
}

std::vector<double> unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Orthogonal region supports make features of the two regions dissimilar.
std::vector<double> region_obs(int region, Rng& rng, int d = 32) {
  std::vector<double> o(static_cast<std::size_t>(d), 0.0);
  for (int i = region * d / 2; i < (region + 1) * d / 2; ++i) o[i] = rng.uniform();
  return o;
}

}  // namespace

TEST(Cosine, BasicCases) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> neg{-1, -2, -3};
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-15);
  EXPECT_NEAR(cosine_similarity(a, neg), -1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_EQ(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{0, 1}), 0.0);
}

TEST(LongTermMemory, EvictsLeastRecentlyUsed) {
  LongTermMemory ltm(2);
  ltm.store(entry(1, {1, 0}, 5));
  ltm.store(entry(2, {0, 1}, 9));
  const auto evicted = ltm.store(entry(3, {1, 1}, 12));
  ASSERT_TRUE(evicted.has_value());
  EXPECT_EQ(evicted->id, 1);
  EXPECT_EQ(ltm.size(), 2u);
}

TEST(LongTermMemory, TieBreaksOnInsertionOrder) {
  LongTermMemory ltm(2);
  ltm.store(entry(1, {1, 0}, 4));
  ltm.store(entry(2, {0, 1}, 4));
  EXPECT_EQ(ltm.store(entry(3, {1, 1}, 4))->id, 1);
}

TEST(LongTermMemory, BestMatchPicksHighestAboveThreshold) {
  LongTermMemory ltm(10);
  ltm.store(entry(1, unit(std::acos(0.992)), 0));
  ltm.store(entry(2, unit(std::acos(0.995)), 0));
  ltm.store(entry(3, unit(1.0), 0));
  const auto q = unit(0.0);
  ASSERT_TRUE(ltm.best_match(q, 0.99).has_value());
  EXPECT_EQ(ltm.at(*ltm.best_match(q, 0.99)).id, 2);
  EXPECT_FALSE(ltm.best_match(unit(0.5), 0.99).has_value());
  EXPECT_EQ(LongTermMemory(3).max_similarity(q), -std::numeric_limits<double>::infinity());
}

TEST(LongTermMemory, TakeOutOfRangeThrows) {
  LongTermMemory ltm(3);
  EXPECT_THROW(ltm.take(0), std::logic_error);
}

TEST(LongTermMemory, MatchesQueueOracleUnderRandomWorkloads) {
  Rng rng(77);
  for (int workload = 0; workload < 20; ++workload) {
    const std::size_t cap = 1 + rng.below(8);
    LongTermMemory ltm(cap);
    // Oracle: (id, last_used) in insertion order; evict min last_used, first among ties.
    std::vector<std::pair<std::int64_t, std::int64_t>> oracle;
    std::int64_t next = 0;
    for (int op = 0; op < 300; ++op) {
      if (!oracle.empty() && rng.below(3) == 0) {
        const std::size_t i = rng.below(oracle.size());
        EXPECT_EQ(ltm.take(i).id, oracle[i].first);
        oracle.erase(oracle.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      const std::int64_t used = static_cast<std::int64_t>(rng.below(50));
      auto e = entry(next, {1.0, 0.0}, used);
      const auto ev = ltm.store(std::move(e));
      oracle.emplace_back(next, used);
      ++next;
      if (oracle.size() > cap) {
        std::size_t victim = 0;
        for (std::size_t j = 1; j < oracle.size(); ++j)
          if (oracle[j].second < oracle[victim].second) victim = j;
        ASSERT_TRUE(ev.has_value());
        EXPECT_EQ(ev->id, oracle[victim].first);
        oracle.erase(oracle.begin() + static_cast<std::ptrdiff_t>(victim));
      } else {
        EXPECT_FALSE(ev.has_value());
      }
      ASSERT_LE(ltm.size(), cap);
      ASSERT_EQ(ltm.size(), oracle.size());
      for (std::size_t j = 0; j < oracle.size(); ++j) ASSERT_EQ(ltm.at(j).id, oracle[j].first);
    }
  }
}

TEST(FarCuriosity, FreshInstance) {
  FarCuriosity fc(FarConfig{}, 1);
  EXPECT_EQ(fc.n_fragments(), 1u);
  Rng rng(1);
  const auto r = fc.process_observation(region_obs(0, rng));
  EXPECT_EQ(r.event, EventKind::none);
  EXPECT_GT(r.intrinsic_reward, 0.0);
}

TEST(FarCuriosity, FragmentationRuleArithmetic) {
  FarConfig cfg;
  cfg.warmup = 1;
  FarCuriosity fc(cfg, 2);
  curiosity::RunningStat avg04(cfg.rnd.surprisal_ema);
  avg04.push(0.4);
  const std::vector<double> feat(64, 1.0);
  EXPECT_TRUE(fc.check_fragmentation(avg04, 5.0, feat));
  EXPECT_FALSE(fc.check_fragmentation(avg04, 3.0, feat));

  // An LTM key with similarity 0.9 to feat vetoes fragmentation.
  std::vector<double> key(64, 1.0);
  for (std::size_t i = 32; i < 64; ++i) key[i] = 0.3474;
  ASSERT_NEAR(cosine_similarity(feat, key), 0.9, 1e-3);
  fc.fragment(key);  // parks the initial module with `key` as its key
  ASSERT_EQ(fc.ltm().size(), 1u);
  // The parked module's key is the lazily-set active key, i.e. `key` itself.
  EXPECT_FALSE(fc.check_fragmentation(avg04, 5.0, feat));
}

TEST(FarCuriosity, WarmupBlocksFragmentation) {
  FarConfig cfg;
  FarCuriosity fc(cfg, 3);
  curiosity::RunningStat few(cfg.rnd.surprisal_ema);
  for (int i = 0; i < cfg.warmup - 1; ++i) few.push(0.1);
  EXPECT_FALSE(fc.check_fragmentation(few, 100.0, std::vector<double>(64, 1.0)));
}

TEST(FarCuriosity, FragmentLogsAndCounts) {
  FarCuriosity fc(FarConfig{}, 4);
  Rng rng(4);
  const auto o = region_obs(1, rng);
  fc.fragment(fc.feature(o));
  EXPECT_EQ(fc.n_fragments(), 2u);
  ASSERT_EQ(fc.event_log().size(), 1u);
  EXPECT_EQ(fc.event_log()[0].kind, EventKind::fragmented);
  EXPECT_EQ(fc.event_log()[0].step, fc.global_step());
  EXPECT_GT(fc.active().reward(o), 0.0);
}

TEST(FarCuriosity, RecallSwapIsAnInvolution) {
  FarCuriosity fc(FarConfig{}, 5);
  Rng rng(5);
  for (int i = 0; i < 30; ++i) fc.process_observation(region_obs(0, rng));
  const auto original = fc.active();
  fc.fragment(fc.feature(region_obs(1, rng)));
  for (int i = 0; i < 30; ++i) fc.active().train(region_obs(1, rng));
  const auto second = fc.active();
  const std::size_t before = fc.ltm().size();

  fc.recall(0);
  EXPECT_EQ(fc.ltm().size(), before);
  EXPECT_TRUE(fc.active().same_state(original));
  fc.recall(0);
  EXPECT_TRUE(fc.active().same_state(second));
  EXPECT_EQ(fc.n_fragments(), 2u);
}

TEST(FarCuriosity, TwoRegionScenarioFragmentsThenRecalls) {
  FarConfig cfg;
  FarCuriosity fc(cfg, 6);
  Rng rng(6);
  const auto a0 = region_obs(0, rng);
  std::vector<std::vector<double>> region_a{a0};
  for (int i = 0; i < 15; ++i) region_a.push_back(region_obs(0, rng));
  for (int i = 0; i < 3000; ++i) fc.process_observation(region_a[i % region_a.size()]);
  ASSERT_EQ(fc.n_fragments(), 1u) << "region A alone must not fragment";

  const auto b = region_obs(1, rng);
  const double avg = fc.active().surprisal_stats().running_average();
  const double ratio = fc.active().reward(b) / avg;
  ASSERT_GT(ratio, cfg.rho) << "constructed B is not novel enough";
  EXPECT_EQ(fc.process_observation(b).event, EventKind::fragmented);
  const auto stored_a = fc.ltm().at(0).module;

  // The observation that keyed module A (the first one seen) recalls it.
  const auto r = fc.process_observation(a0);
  EXPECT_EQ(r.event, EventKind::recalled);
  EXPECT_EQ(fc.active_id(), 1);
  // Bit-identical up to the single training step taken after the recall.
  auto replay = stored_a;
  replay.score(a0);
  replay.train(a0);
  EXPECT_TRUE(fc.active().same_state(replay));
}

TEST(FarCuriosity, CapacityHoldsUnderRandomEvents) {
  FarConfig cfg;
  cfg.capacity = 5;
  cfg.rnd = curiosity::RndConfig{4, 4, 4};
  FarCuriosity fc(cfg, 7);
  Rng rng(7);
  for (int op = 0; op < 2000; ++op) {
    std::vector<double> f(4);
    for (auto& v : f) v = rng.uniform(-1, 1);
    if (!fc.ltm().empty() && rng.below(2) == 0)
      fc.recall(rng.below(fc.ltm().size()));
    else
      fc.fragment(f);
    ASSERT_LE(fc.ltm().size(), cfg.capacity);
  }
}

TEST(FarCuriosity, ProbeRewardIsPure) {
  FarCuriosity fc(FarConfig{}, 8);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) fc.process_observation(region_obs(i % 2, rng));
  const auto snapshot = fc.to_json().dump();
  fc.probe_reward(region_obs(0, rng));
  EXPECT_EQ(fc.to_json().dump(), snapshot);
}

TEST(FarCuriosity, JsonRoundTripContinuesIdentically) {
  FarConfig cfg;
  FarCuriosity fc(cfg, 9);
  Rng rng(9);
  std::vector<std::vector<double>> stream;
  for (int i = 0; i < 1200; ++i) stream.push_back(region_obs((i / 200) % 2, rng));
  for (int i = 0; i < 600; ++i) fc.process_observation(stream[i]);
  auto back = FarCuriosity::from_json(nlohmann::json::parse(fc.to_json().dump()));
  for (int i = 600; i < 1200; ++i) {
    const auto x = fc.process_observation(stream[i]);
    const auto y = back.process_observation(stream[i]);
    ASSERT_EQ(x.intrinsic_reward, y.intrinsic_reward);
    ASSERT_EQ(x.event, y.event);
  }
  EXPECT_EQ(fc.to_json().dump(), back.to_json().dump());
}

TEST(FarCuriosity, ForeignVersionRejected) {
  auto doc = FarCuriosity(FarConfig{}, 1).to_json();
  doc["version"] = 2;
  EXPECT_ANY_THROW(FarCuriosity::from_json(doc));
}
