#pragma once

// Content-destruction planners. One subarray is planned and the plan is
// replicated across the bank, since every subarray decodes identically.

#include <algorithm>
#include <bit>
#include <bitset>
#include <cstdint>
#include <string>
#include <vector>

#include "mrasim/command_engine.hpp"
#include "mrasim/dram_state.hpp"
#include "mrasim/error.hpp"
#include "mrasim/row_decoder.hpp"

namespace mrasim {

struct DestructStep {
  enum class Kind : std::uint8_t { Write, BulkWrite, Mrc, RowClone, Frac };
  Kind kind = Kind::Write;
  RowAddress a;  // Write/Frac: row; BulkWrite: first anchor; Mrc/RowClone: source
  RowAddress b;  // BulkWrite: second anchor; Mrc: partner; RowClone: destination
};

inline std::string_view to_string(DestructStep::Kind k) {
  switch (k) {
    case DestructStep::Kind::Write: return "write";
    case DestructStep::Kind::BulkWrite: return "bulk_write";
    case DestructStep::Kind::Mrc: return "mrc";
    case DestructStep::Kind::RowClone: return "rowclone";
    case DestructStep::Kind::Frac: return "frac";
  }
  return "?";
}

struct DestructionPlan {
  std::string name;
  std::vector<DestructStep> steps;
  Trace trace;
  double modeled_time = 0.0;

  std::size_t step_count() const { return steps.size(); }
};

/// Command sequence of one step, starting at t0. `pattern` is the WRITE
/// tile; the engine repeats it across the row.
inline Trace step_trace(const DestructStep& s, const Bits& pattern, double t0, const TimingParams& t) {
  switch (s.kind) {
    case DestructStep::Kind::Write: return nominal_write_trace(s.a, pattern, t0, t);
    case DestructStep::Kind::BulkWrite: return bulk_write_trace(s.a, s.b, pattern, t0, t);
    case DestructStep::Kind::Mrc:
    case DestructStep::Kind::RowClone: return mrc_trace(s.a, s.b, t0, t);
    case DestructStep::Kind::Frac: return frac_trace(s.a, t0, t);
  }
  return {};
}

/// Appends steps back to back, delaying a step just enough that no tFAW
/// window holds more than the allowed number of ACTs.
inline void schedule(DestructionPlan& plan, const Bits& pattern, const TimingParams& t) {
  plan.trace.clear();
  std::vector<double> acts;
  double cursor = 0.0;
  for (const auto& s : plan.steps) {
    const Trace rel = step_trace(s, pattern, 0.0, t);
    double start = cursor;
    for (bool moved = true; moved;) {
      moved = false;
      const std::size_t keep = std::min<std::size_t>(acts.size(), t.max_acts_in_faw);
      std::vector<double> trial(acts.end() - static_cast<std::ptrdiff_t>(keep), acts.end());
      for (const auto& c : rel) {
        if (c.kind != Command::Kind::Act) continue;
        const double at = start + c.time;
        trial.push_back(at);
        const std::size_t k = trial.size();
        if (k > t.max_acts_in_faw && trial[k - 1 - t.max_acts_in_faw] + t.t_faw > at) {
          start += trial[k - 1 - t.max_acts_in_faw] + t.t_faw - at;
          moved = true;
          break;
        }
      }
    }
    for (const auto& c : rel) {
      Command cc = c;
      cc.time += start;
      if (cc.kind == Command::Kind::Act) acts.push_back(cc.time);
      plan.trace.push_back(std::move(cc));
    }
    cursor = trace_latency(plan.trace, t);
  }
  plan.modeled_time = trace_latency(plan.trace, t);
}

namespace detail {

inline std::vector<DestructStep> replicate(const std::vector<DestructStep>& local, const Geometry& g) {
  std::vector<DestructStep> out;
  out.reserve(local.size() * g.n_subarrays());
  for (std::uint32_t s = 0; s < g.n_subarrays(); ++s) {
    const std::uint32_t base = g.subarray_base(s).value;
    for (auto st : local) {
      st.a = RowAddress{st.a.value + base};
      st.b = RowAddress{st.b.value + base};
      out.push_back(st);
    }
  }
  return out;
}

inline DestructionPlan finish(std::string name, std::vector<DestructStep> local, const Geometry& g,
                              const Bits& pattern, const TimingParams& t) {
  DestructionPlan p{std::move(name), replicate(local, g), {}, 0.0};
  schedule(p, pattern, t);
  return p;
}

}  // namespace detail

inline constexpr std::uint32_t kMaxPlannedSubarray = 512;

/// Greedy cover: after seeding one row with a nominal WRITE, repeatedly pick
/// the group (n <= max_n) with the most uncovered rows, lowest anchors first
/// on ties, and fill it with whichever of Bulk-Write or Multi-RowCopy is
/// cheaper (Multi-RowCopy needs an already covered source in the group).
inline DestructionPlan plan_pulsar(const Geometry& g, std::uint32_t max_n, const Bits& pattern,
                                   const TimingParams& t = {}) {
  if (!std::has_single_bit(max_n) || max_n < 2 || max_n > 32)
    throw Error(ErrorCode::InvalidArgument, "max_n must be 2, 4, 8, 16 or 32");
  const std::uint32_t R = g.subarray_size();
  if (R > kMaxPlannedSubarray) throw Error(ErrorCode::InvalidArgument, "subarray too large for the planner");
  using Cover = std::bitset<kMaxPlannedSubarray>;
  const auto groups = enumerate_groups(0, max_n, g.decoder);
  std::vector<Cover> masks(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (RowAddress r : groups[i].rows) masks[i].set(r.value);

  const double bulk_cost = trace_latency(bulk_write_trace(RowAddress{0}, RowAddress{1}, pattern, 0, t), t);
  const double mrc_cost = trace_latency(mrc_trace(RowAddress{0}, RowAddress{1}, 0, t), t);

  std::vector<DestructStep> local{{DestructStep::Kind::Write, RowAddress{0}, RowAddress{0}}};
  Cover covered;
  covered.set(0);
  while (covered.count() < R) {
    std::size_t best = groups.size();
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const std::size_t gain = (masks[i] & ~covered).count();
      if (gain > best_gain) {
        best = i;
        best_gain = gain;
      }
    }
    const RowGroup& grp = groups[best];
    const Cover have = masks[best] & covered;
    if (have.any() && mrc_cost < bulk_cost) {
      RowAddress src{0};
      for (RowAddress r : grp.rows)
        if (have.test(r.value)) {
          src = r;
          break;
        }
      local.push_back({DestructStep::Kind::Mrc, src, partner_of(grp, src, g.decoder)});
    } else {
      local.push_back({DestructStep::Kind::BulkWrite, grp.first, grp.second});
    }
    covered |= masks[best];
  }
  return detail::finish("pulsar-" + std::to_string(max_n), std::move(local), g, pattern, t);
}

/// One WRITE per subarray, then an in-subarray RowClone into every other row.
/// Each destination copies from the row with its lowest nonzero predecoder
/// select cleared, which is always written earlier.
inline DestructionPlan plan_rowclone(const Geometry& g, const Bits& pattern, const TimingParams& t = {}) {
  const DecoderLayout& d = g.decoder;
  std::vector<DestructStep> local{{DestructStep::Kind::Write, RowAddress{0}, RowAddress{0}}};
  for (std::uint32_t r = 1; r < g.subarray_size(); ++r) {
    auto dec = decode_address(RowAddress{r}, d);
    std::vector<std::uint8_t> idx;
    for (const auto& s : dec.selects) idx.push_back(s.index);
    for (auto& i : idx)
      if (i != 0) {
        i = 0;
        break;
      }
    local.push_back({DestructStep::Kind::RowClone, assemble_address(0, idx, d), RowAddress{r}});
  }
  return detail::finish("rowclone", std::move(local), g, pattern, t);
}

inline DestructionPlan plan_frac(const Geometry& g, const Bits& pattern, const TimingParams& t = {}) {
  std::vector<DestructStep> local;
  for (std::uint32_t r = 0; r < g.subarray_size(); ++r)
    local.push_back({DestructStep::Kind::Frac, RowAddress{r}, RowAddress{r}});
  return detail::finish("frac", std::move(local), g, pattern, t);
}

/// Rows that still hold anything other than the pattern or Vdd/2.
inline std::size_t uncovered_rows(const BankState& bank, const Bits& pattern) {
  std::size_t bad = 0;
  const Row want = [&] {
    Row r;
    for (std::uint32_t b = 0; b < bank.n_bitlines(); ++b) r.push_back(CellLevel::from_bit(pattern[b % pattern.size()]));
    return r;
  }();
  for (std::uint32_t r = 0; r < bank.geometry().n_rows(); ++r) {
    const Row& row = bank.row(RowAddress{r});
    const bool neutral =
        std::all_of(row.begin(), row.end(), [](const CellLevel& c) { return c.kind == CellLevel::Kind::Neutral; });
    bad += !(neutral || row == want);
  }
  return bad;
}

struct PlanComparison {
  std::string plan;
  std::string baseline;
  std::size_t plan_steps = 0;
  std::size_t baseline_steps = 0;
  double plan_time = 0.0;
  double baseline_time = 0.0;
  double speedup = 0.0;
};

inline PlanComparison compare(const DestructionPlan& plan, const DestructionPlan& baseline) {
  if (!(plan.modeled_time > 0)) throw Error(ErrorCode::InvalidArgument, "plan has no modeled time");
  return {plan.name,          baseline.name,          plan.step_count(),
          baseline.step_count(), plan.modeled_time, baseline.modeled_time,
          baseline.modeled_time / plan.modeled_time};
}

}  // namespace mrasim
