#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mrasim/command_engine.hpp"

using namespace mrasim;

namespace {

constexpr std::uint32_t kB = 96;

BankState bank(BankProfile prof = {}) {
  Geometry g;
  g.n_bitlines = kB;
  return BankState(g, prof);
}

Bits random_bits(std::mt19937& rng, std::uint32_t n = kB) {
  Bits b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1u);
  return b;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

// Brute-force tFAW oracle: every ACT opens a window [t, t + tFAW).
std::vector<std::pair<double, unsigned>> faw_oracle(const std::vector<double>& acts, const TimingParams& t) {
  std::vector<double> s = acts;
  std::sort(s.begin(), s.end());
  std::vector<std::pair<double, unsigned>> out;
  for (double a : s) {
    unsigned n = 0;
    for (double b : s) n += b >= a && b < a + t.t_faw;
    if (n > t.max_acts_in_faw) out.push_back({a, n});
  }
  return out;
}

}  // namespace

TEST(CommandEngine, HexRoundTrip) {
  std::mt19937 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Bits b = random_bits(rng, 8 * (1 + rng() % 20));
    EXPECT_EQ(parse_hex_bits(format_hex_bits(b)), b);
  }
  EXPECT_EQ(parse_hex_bits("01"), (Bits{1, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(parse_hex_bits("A5"), parse_hex_bits("a5"));
  EXPECT_THROW(parse_hex_bits("abc"), Error);
  EXPECT_THROW(parse_hex_bits("zz"), Error);
  EXPECT_THROW(parse_hex_bits(""), Error);
}

TEST(CommandEngine, TraceTextRoundTrip) {
  std::mt19937 rng(2);
  for (int k = 0; k < 20; ++k) {
    Trace t;
    double time = 0;
    for (int i = 0; i < 30; ++i) {
      time += 0.5 * (1 + rng() % 40);
      switch (rng() % 4) {
        case 0: t.push_back(Command::act(time, RowAddress{static_cast<std::uint32_t>(rng() % 65536)})); break;
        case 1: t.push_back(Command::pre(time)); break;
        case 2: t.push_back(Command::read(time)); break;
        default: t.push_back(Command::write(time, random_bits(rng, 16))); break;
      }
    }
    std::stringstream ss;
    write_trace(ss, t);
    const Trace back = parse_trace(ss);
    ASSERT_EQ(back.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_EQ(back[i].kind, t[i].kind);
      EXPECT_EQ(back[i].time, t[i].time);
      EXPECT_EQ(back[i].row, t[i].row);
      EXPECT_EQ(back[i].data, t[i].data);
    }
  }
}

TEST(CommandEngine, TraceParseErrors) {
  for (const char* bad : {"0 ACT", "x ACT 1", "0 ACT 1 2", "0 PRE 4", "0 WRITE", "0 NOP", "0 ACT -1"}) {
    std::istringstream is(bad);
    EXPECT_EQ(code_of([&] { parse_trace(is); }), ErrorCode::MalformedTrace) << bad;
  }
  std::istringstream ok("# comment\n\n  5 ACT 3   # trailing comment\n");
  EXPECT_EQ(parse_trace(ok).size(), 1u);
}

TEST(CommandEngine, ClassifyApa) {
  const TimingParams t;
  EXPECT_EQ(classify_apa(32, 13.5, t), ApaRegime::Normal);
  EXPECT_EQ(classify_apa(40, 1.5, t), ApaRegime::Mrc);
  EXPECT_EQ(classify_apa(1.5, 1.5, t), ApaRegime::ChargeShare);
  EXPECT_EQ(classify_apa(10, 1.5, t), ApaRegime::Undefined);
  EXPECT_EQ(classify_apa(32, 6, t), ApaRegime::Undefined);
  EXPECT_EQ(classify_apa(1.5, 6, t), ApaRegime::Undefined);
  EXPECT_THROW(classify_apa(0, 1, t), Error);
}

TEST(CommandEngine, CanonicalLatencies) {
  const TimingParams t;
  const RowAddress a{0}, b{6};
  EXPECT_DOUBLE_EQ(trace_latency(charge_share_trace(a, b, 0, t), t), 2 * t.apa_gap + t.restore_tail + t.t_rp);
  EXPECT_DOUBLE_EQ(trace_latency(mrc_trace(a, b, 0, t), t), t.t_ras + t.apa_gap + t.restore_tail + t.t_rp);
  EXPECT_DOUBLE_EQ(trace_latency(frac_trace(a, 0, t), t), t.apa_gap + t.t_rp);
  EXPECT_DOUBLE_EQ(trace_latency(nominal_write_trace(a, Bits(8, 1), 0, t), t),
                   std::max(t.t_ras, t.t_rcd + t.t_wr) + t.t_rp);
  EXPECT_DOUBLE_EQ(trace_latency(charge_share_trace(a, b, 0, t), t), 48.5);
  EXPECT_DOUBLE_EQ(trace_latency(mrc_trace(a, b, 0, t), t), 79.0);
}

TEST(CommandEngine, NominalWriteTouchesOneRow) {
  auto bk = bank();
  std::mt19937 rng(3);
  const Bits d = random_bits(rng);
  execute(bk, nominal_write_trace(RowAddress{5}, d, 0, TimingParams{}));
  EXPECT_EQ(read_row(bk, RowAddress{5}), d);
  EXPECT_EQ(read_row(bk, RowAddress{4}), Bits(kB, 0));
  EXPECT_TRUE(bk.is_closed());
}

TEST(CommandEngine, NominalApaOpensOnlySecondRow) {
  auto bk = bank();
  std::mt19937 rng(4);
  const Bits d = random_bits(rng);
  const TimingParams t;
  const Trace tr{Command::act(0, RowAddress{256}), Command::pre(t.t_ras), Command::act(t.t_ras + t.t_rp, RowAddress{287}),
                 Command::write(t.t_ras + t.t_rp + t.t_rcd, d), Command::pre(t.t_ras + t.t_rp + 40)};
  execute(bk, tr);
  EXPECT_EQ(read_row(bk, RowAddress{287}), d);
  EXPECT_EQ(read_row(bk, RowAddress{256}), Bits(kB, 0));
}

TEST(CommandEngine, MrcCopiesSourceToWholeGroup) {
  std::mt19937 rng(5);
  for (int k = 0; k < 20; ++k) {
    auto bk = bank();
    const RowAddress a{static_cast<std::uint32_t>(rng() % 512)}, b{static_cast<std::uint32_t>(rng() % 512)};
    const auto g = nrg(a, b);
    for (RowAddress r : g.rows) bk.fill_row(r, random_bits(rng));
    const Bits src = read_row(bk, a);
    const auto res = execute(bk, mrc_trace(a, b, 0, TimingParams{}));
    for (RowAddress r : g.rows) EXPECT_EQ(read_row(bk, r), src);
    EXPECT_EQ(res.events[2].detail, "MRC");
  }
}

TEST(CommandEngine, ChargeShareComputesMajority) {
  auto bk = bank();
  std::mt19937 rng(6);
  const Bits x = random_bits(rng), y = random_bits(rng), z = random_bits(rng);
  bk.fill_row(RowAddress{0}, x);
  bk.fill_row(RowAddress{1}, y);
  bk.fill_row(RowAddress{6}, z);
  frac(bk, RowAddress{7});
  execute(bk, charge_share_trace(RowAddress{0}, RowAddress{7}, 0, TimingParams{}));
  for (RowAddress r : nrg(RowAddress{0}, RowAddress{7}).rows) {
    const Bits got = read_row(bk, r);
    for (std::uint32_t b = 0; b < kB; ++b) EXPECT_EQ(got[b], (x[b] + y[b] + z[b]) >= 2);
  }
}

TEST(CommandEngine, ChargeShareTieIsUnresolvedOnStrictModules) {
  auto bk = bank();
  bk.fill_row(RowAddress{0}, CellLevel::one());
  bk.fill_row(RowAddress{1}, CellLevel::zero());
  EXPECT_EQ(code_of([&] { execute(bk, charge_share_trace(RowAddress{0}, RowAddress{1}, 0, TimingParams{})); }),
            ErrorCode::UnresolvedCell);
}

TEST(CommandEngine, BiasedTieFollowsFirstRowPolarity) {
  for (std::uint32_t first : {0u, 1u}) {
    auto bk = bank(BankProfile{true});
    bk.fill_row(RowAddress{0}, CellLevel::one());
    bk.fill_row(RowAddress{1}, CellLevel::zero());
    execute(bk, charge_share_trace(RowAddress{first}, RowAddress{1 - first}, 0, TimingParams{}));
    EXPECT_EQ(read_row(bk, RowAddress{0}), Bits(kB, bias_bit(bk.polarity(RowAddress{first}))));
  }
}

TEST(CommandEngine, BulkWriteSkipsSensingOnTies) {
  auto bk = bank();
  std::mt19937 rng(7);
  const auto g = nrg(RowAddress{127}, RowAddress{128});
  for (std::size_t i = 0; i < g.rows.size(); ++i) bk.fill_row(g.rows[i], CellLevel::from_bit(i % 2));
  const Bits d = random_bits(rng, 8);
  execute(bk, bulk_write_trace(RowAddress{127}, RowAddress{128}, d, 0, TimingParams{}));
  for (RowAddress r : g.rows) EXPECT_EQ(read_row(bk, r), detail::tile(d, kB));
}

TEST(CommandEngine, FracIsIdempotent) {
  auto bk = bank();
  std::mt19937 rng(8);
  bk.fill_row(RowAddress{9}, random_bits(rng));
  frac(bk, RowAddress{9});
  const auto once = snapshot(bk);
  for (const auto& c : bk.row(RowAddress{9})) EXPECT_EQ(c.kind, CellLevel::Kind::Neutral);
  frac(bk, RowAddress{9});
  EXPECT_EQ(snapshot(bk), once);
}

TEST(CommandEngine, ProtocolErrors) {
  const TimingParams t;
  auto run = [&](Trace tr) {
    auto bk = bank();
    execute(bk, tr);
  };
  EXPECT_EQ(code_of([&] { run({Command::act(0, RowAddress{0}), Command::act(40, RowAddress{1})}); }),
            ErrorCode::ProtocolViolation);
  EXPECT_EQ(code_of([&] { run({Command::write(0, Bits(8, 1))}); }), ErrorCode::WriteWhileClosed);
  EXPECT_EQ(code_of([&] { run({Command::read(0)}); }), ErrorCode::ProtocolViolation);
  EXPECT_EQ(code_of([&] { run({Command::act(5, RowAddress{0}), Command::pre(5)}); }), ErrorCode::MalformedTrace);
  EXPECT_EQ(code_of([&] { run({Command::act(0, RowAddress{0}), Command::pre(10)}); }),
            ErrorCode::UndefinedTimingRegime);
  EXPECT_EQ(code_of([&] { run({Command::act(0, RowAddress{0}), Command::pre(1.5), Command::act(3, RowAddress{512})}); }),
            ErrorCode::CrossSubarray);
  EXPECT_EQ(code_of([&] {
              run({Command::act(0, RowAddress{0}), Command::pre(32), Command::act(33.5, RowAddress{6}),
                   Command::pre(35), Command::act(36.5, RowAddress{24})});
            }),
            ErrorCode::TooManyLatched);
  EXPECT_EQ(code_of([&] { run({Command::act(0, RowAddress{70000})}); }), ErrorCode::RowOutOfRange);
  TimingParams bad = t;
  bad.t_rp = 50;
  auto bk = bank();
  ExecContext ctx;
  ctx.timing = bad;
  EXPECT_EQ(code_of([&] { execute(bk, Trace{}, ctx); }), ErrorCode::ConfigError);
}

TEST(CommandEngine, VariationWidthMustMatch) {
  auto bk = bank();
  AnalogParams p;
  p.variation_sigma = 0.1;
  VariationSample vs(p, 1, kB + 1);
  ExecContext ctx;
  ctx.variation = &vs;
  EXPECT_EQ(code_of([&] { frac(bk, RowAddress{1}, ctx); execute(bk, mrc_trace(RowAddress{0}, RowAddress{6}, 0, {}), ctx); }),
            ErrorCode::InvalidArgument);
}

TEST(CommandEngine, CheckPowerMatchesBruteForce) {
  std::mt19937 rng(9);
  TimingParams t;
  for (int k = 0; k < 200; ++k) {
    Trace tr;
    std::vector<double> acts;
    double time = 0;
    const int n = 1 + static_cast<int>(rng() % 25);
    for (int i = 0; i < n; ++i) {
      time += 0.5 * (1 + rng() % 16);
      if (rng() % 3) {
        tr.push_back(Command::act(time, RowAddress{0}));
        acts.push_back(time);
      } else {
        tr.push_back(Command::pre(time));
      }
    }
    const auto got = check_power(tr, t);
    const auto want = faw_oracle(acts, t);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].window_start, want[i].first);
      EXPECT_EQ(got[i].acts, want[i].second);
    }
  }
}

TEST(CommandEngine, ReadReturnsSensedRow) {
  auto bk = bank();
  std::mt19937 rng(10);
  const Bits d = random_bits(rng);
  bk.fill_row(RowAddress{3}, d);
  const Trace tr{Command::act(0, RowAddress{3}), Command::read(13.5), Command::pre(32)};
  const auto res = execute(bk, tr);
  ASSERT_EQ(res.reads.size(), 1u);
  EXPECT_EQ(res.reads[0], d);
  std::ostringstream csv;
  write_events_csv(csv, res.events);
  EXPECT_EQ(csv.str().substr(0, 24), "time,event,rows,detail\n0");
}
