#include <gtest/gtest.h>

#include "mrasim/destruct.hpp"

using namespace mrasim;

namespace {

Geometry geom(std::uint32_t subarray_bits, std::uint32_t bitlines = 16) {
  Geometry g;
  g.decoder.subarray_bits = subarray_bits;
  g.n_bitlines = bitlines;
  return g;
}

const Bits kPattern = parse_hex_bits("a5");

// Runs the plan on a randomly initialised bank and counts rows left intact.
std::size_t residue(const DestructionPlan& p, const Geometry& g) {
  BankState bank(g);
  std::vector<RowAddress> all;
  for (std::uint32_t r = 0; r < g.n_rows(); ++r) all.push_back(RowAddress{r});
  init_rows(bank, all, DataPattern::random(99));
  execute(bank, p.trace);
  return uncovered_rows(bank, kPattern);
}

}  // namespace

TEST(Destruct, EveryPlanErasesEveryRow) {
  const auto g = geom(2);
  for (std::uint32_t n = 2; n <= 32; n *= 2) EXPECT_EQ(residue(plan_pulsar(g, n, kPattern), g), 0u) << n;
  EXPECT_EQ(residue(plan_rowclone(g, kPattern), g), 0u);
  EXPECT_EQ(residue(plan_frac(g, kPattern), g), 0u);
}

TEST(Destruct, RandomBankIsNotCoveredBeforehand) {
  const auto g = geom(1);
  BankState bank(g);
  std::vector<RowAddress> all;
  for (std::uint32_t r = 0; r < g.n_rows(); ++r) all.push_back(RowAddress{r});
  init_rows(bank, all, DataPattern::random(1));
  EXPECT_GT(uncovered_rows(bank, kPattern), g.n_rows() - 4);
}

TEST(Destruct, SchedulesRespectTfaw) {
  const auto g = geom(1);
  const TimingParams t;
  for (const auto& p : {plan_pulsar(g, 32, kPattern), plan_pulsar(g, 2, kPattern), plan_rowclone(g, kPattern),
                        plan_frac(g, kPattern)}) {
    EXPECT_TRUE(check_power(p.trace, t).empty()) << p.name;
    EXPECT_DOUBLE_EQ(p.modeled_time, trace_latency(p.trace, t));
    for (std::size_t i = 1; i < p.trace.size(); ++i) EXPECT_GT(p.trace[i].time, p.trace[i - 1].time);
  }
}

TEST(Destruct, StepCountsScaleWithSubarrays) {
  const auto one = plan_pulsar(geom(0), 32, kPattern);
  const auto four = plan_pulsar(geom(2), 32, kPattern);
  EXPECT_EQ(four.step_count(), 4 * one.step_count());
  EXPECT_EQ(plan_rowclone(geom(0), kPattern).step_count(), 512u);
  EXPECT_EQ(plan_frac(geom(0), kPattern).step_count(), 512u);
}

TEST(Destruct, LargerGroupsNeedFewerSteps) {
  const auto g = geom(0);
  std::size_t prev = SIZE_MAX;
  double prev_time = 1e300;
  for (std::uint32_t n = 2; n <= 32; n *= 2) {
    const auto p = plan_pulsar(g, n, kPattern);
    EXPECT_LT(p.step_count(), prev);
    EXPECT_LT(p.modeled_time, prev_time);
    prev = p.step_count();
    prev_time = p.modeled_time;
    // A group of n rows covers at most n new rows, after the seed write.
    EXPECT_GE(p.step_count(), 1 + (512 - 1 + n - 1) / n);
  }
}

TEST(Destruct, RowCloneSourcesPrecedeDestinations) {
  const auto p = plan_rowclone(geom(0), kPattern);
  std::vector<bool> done(512, false);
  for (const auto& s : p.steps) {
    if (s.kind == DestructStep::Kind::Write) {
      done[s.a.value] = true;
      continue;
    }
    ASSERT_EQ(s.kind, DestructStep::Kind::RowClone);
    EXPECT_TRUE(done[s.a.value]);
    EXPECT_EQ(differing_groups(s.a, s.b), 1u);  // a two-row APA: plain row copy
    done[s.b.value] = true;
  }
}

TEST(Destruct, CompareAndArgumentChecks) {
  const auto g = geom(0);
  const auto a = plan_pulsar(g, 32, kPattern), b = plan_rowclone(g, kPattern);
  const auto c = compare(a, b);
  EXPECT_DOUBLE_EQ(c.speedup, b.modeled_time / a.modeled_time);
  EXPECT_EQ(c.plan_steps, a.step_count());
  EXPECT_THROW(plan_pulsar(g, 3, kPattern), Error);
  EXPECT_THROW(plan_pulsar(g, 64, kPattern), Error);
  EXPECT_THROW(compare(DestructionPlan{}, b), Error);
}
