#pragma once

// Majority, Multi-RowCopy and Bulk-Write built from command-engine traces,
// plus the success-rate characterization loop.

#include <bit>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mrasim/analog_model.hpp"
#include "mrasim/command_engine.hpp"
#include "mrasim/dram_state.hpp"
#include "mrasim/error.hpp"
#include "mrasim/row_decoder.hpp"

namespace mrasim {

struct ReplicationLayout {
  unsigned m = 3;
  unsigned n = 4;
  unsigned copies = 1;
  unsigned neutrals = 1;
};

inline ReplicationLayout replication_layout(unsigned m, unsigned n) {
  if (m < 3 || m % 2 == 0 || m > 31)
    throw Error(ErrorCode::InvalidArity, "majority needs an odd input count in [3, 31], got " + std::to_string(m));
  if (n < 4 || n > 32 || !std::has_single_bit(n))
    throw Error(ErrorCode::InvalidArity, "row count must be 4, 8, 16 or 32, got " + std::to_string(n));
  if (m > n)
    throw Error(ErrorCode::InvalidArity,
                "MAJ" + std::to_string(m) + " does not fit in " + std::to_string(n) + " rows");
  const unsigned copies = n / m;
  return {m, n, copies, n - m * copies};
}

/// Smallest legal row count for `m` inputs.
inline unsigned min_rows_for(unsigned m) {
  return std::max(4u, std::bit_ceil(m));
}

/// What each row of the group holds before the charge-sharing APA.
struct RowRole {
  enum class Kind : std::uint8_t { Input, Neutral, Filler };
  RowAddress row;
  Kind kind = Kind::Input;
  unsigned input = 0;      // Input
  std::uint8_t fill = 0;   // Filler bit
};

/// Rows in activation order (first anchor leads, the rest ascending). Inputs
/// are placed round-robin over the ascending rows; the tail rows are neutral.
/// Biased profiles cannot Frac, so the tail is filled with balanced 0/1 rows
/// and, for an odd tail, one extra row holding the complement of the bias bit.
inline std::vector<RowRole> plan_roles(const RowGroup& group, const ReplicationLayout& lay, bool biased,
                                       std::uint8_t bias) {
  if (group.n() != lay.n)
    throw Error(ErrorCode::InvalidArgument, "group has " + std::to_string(group.n()) + " rows, layout needs " +
                                                std::to_string(lay.n));
  std::vector<RowRole> roles;
  const unsigned used = lay.m * lay.copies;
  for (unsigned i = 0; i < lay.n; ++i) {
    RowRole r{group.rows[i], RowRole::Kind::Input, i % lay.m, 0};
    if (i >= used) {
      const unsigned t = i - used;
      if (!biased) {
        r.kind = RowRole::Kind::Neutral;
      } else {
        r.kind = RowRole::Kind::Filler;
        const unsigned pairs = lay.neutrals / 2;
        r.fill = t < 2 * pairs ? static_cast<std::uint8_t>(t % 2) : static_cast<std::uint8_t>(1 - bias);
      }
    }
    roles.push_back(r);
  }
  std::stable_partition(roles.begin(), roles.end(), [&](const RowRole& r) { return r.row == group.first; });
  return roles;
}

inline std::uint8_t majority_bit(unsigned ones, unsigned m) { return ones * 2 > m ? 1 : 0; }

struct MajResult {
  Bits bits;
  Bits stable_mask;  // bits == boolean majority of the inputs
  double success_rate = 0.0;
};

inline Bits majority_oracle(std::span<const Bits> inputs) {
  Bits out(inputs.front().size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    unsigned ones = 0;
    for (const auto& in : inputs) ones += in[b];
    out[b] = majority_bit(ones, static_cast<unsigned>(inputs.size()));
  }
  return out;
}

/// Loads the replicated inputs, neutralises the spare rows and issues a
/// charge-sharing APA over `group`.
inline MajResult maj(BankState& bank, std::span<const Bits> inputs, const RowGroup& group,
                     const ExecContext& ctx = {}) {
  const auto lay = replication_layout(static_cast<unsigned>(inputs.size()), static_cast<unsigned>(group.n()));
  const bool biased = bank.profile().biased_senseamps;
  const auto roles = plan_roles(group, lay, biased, bias_bit(bank.polarity(group.first)));
  for (const auto& in : inputs)
    if (in.size() != bank.n_bitlines()) throw Error(ErrorCode::InvalidArgument, "input width mismatch");
  for (const auto& r : roles) {
    switch (r.kind) {
      case RowRole::Kind::Input: bank.fill_row(r.row, inputs[r.input]); break;
      case RowRole::Kind::Filler: bank.fill_row(r.row, CellLevel::from_bit(r.fill)); break;
      case RowRole::Kind::Neutral: frac(bank, r.row, ctx); break;
    }
  }
  execute(bank, charge_share_trace(group.first, group.second, 0.0, ctx.timing), ctx);
  MajResult res;
  res.bits = read_row(bank, group.first);
  const Bits expect = majority_oracle(inputs);
  res.stable_mask.resize(expect.size());
  std::size_t ok = 0;
  for (std::size_t b = 0; b < expect.size(); ++b) {
    res.stable_mask[b] = res.bits[b] == expect[b];
    ok += res.stable_mask[b];
  }
  res.success_rate = static_cast<double>(ok) / static_cast<double>(expect.size());
  return res;
}

/// APA in the restore regime: `src` is sensed and copied to every row of the group.
inline void multi_row_clone(BankState& bank, RowAddress src, const RowGroup& group, const ExecContext& ctx = {}) {
  if (!group.contains(src)) throw Error(ErrorCode::InvalidArgument, "source row is not in the group");
  execute(bank, mrc_trace(src, partner_of(group, src, bank.geometry().decoder), 0.0, ctx.timing), ctx);
}

inline void bulk_write(BankState& bank, const RowGroup& group, std::span<const std::uint8_t> data,
                       const ExecContext& ctx = {}) {
  execute(bank, bulk_write_trace(group.first, group.second, Bits(data.begin(), data.end()), 0.0, ctx.timing), ctx);
}

// ---- characterization ----

enum class PatternKind : std::uint8_t { OnesZeros, Random };

inline std::string_view to_string(PatternKind p) { return p == PatternKind::OnesZeros ? "ones_zeros" : "random"; }

/// Trials used by the characterization procedure: the whole truth table for uniform
/// rows, a fixed count for random data.
inline std::uint32_t pattern_trials(PatternKind p, unsigned m, std::uint32_t random_trials) {
  return p == PatternKind::OnesZeros ? (1u << m) : random_trials;
}

/// Inputs of one trial. OnesZeros: input j is uniform, equal to bit j of the trial index.
inline std::vector<Bits> trial_inputs(PatternKind p, unsigned m, std::uint32_t trial, std::uint64_t seed,
                                      std::uint32_t n_bitlines) {
  std::vector<Bits> in(m, Bits(n_bitlines));
  if (p == PatternKind::OnesZeros) {
    for (unsigned j = 0; j < m; ++j) std::fill(in[j].begin(), in[j].end(), static_cast<std::uint8_t>((trial >> j) & 1u));
    return in;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), trial, m};
  std::mt19937_64 gen(seq);
  for (auto& row : in) {
    std::uint64_t w = 0;
    for (std::uint32_t b = 0; b < n_bitlines; ++b) {
      if (b % 64 == 0) w = gen();
      row[b] = static_cast<std::uint8_t>((w >> (b % 64)) & 1u);
    }
  }
  return in;
}

struct CharacterizeResult {
  Bits stable;
  std::uint32_t trials = 0;
  double success_rate = 0.0;
};

/// Runs every trial through the command engine on `bank` (slow, reference path).
inline CharacterizeResult characterize_engine(BankState& bank, const RowGroup& group, unsigned m, PatternKind p,
                                              std::uint32_t random_trials, std::uint64_t seed, ExecContext ctx) {
  const std::uint32_t trials = pattern_trials(p, m, random_trials);
  CharacterizeResult r{Bits(bank.n_bitlines(), 1), trials, 0.0};
  for (std::uint32_t t = 0; t < trials; ++t) {
    if (ctx.variation) ctx.variation->set_trial(t);
    const auto in = trial_inputs(p, m, t, seed, bank.n_bitlines());
    const auto res = maj(bank, in, group, ctx);
    for (std::size_t b = 0; b < r.stable.size(); ++b) r.stable[b] &= res.stable_mask[b];
  }
  std::size_t ok = 0;
  for (auto s : r.stable) ok += s;
  r.success_rate = static_cast<double>(ok) / static_cast<double>(r.stable.size());
  return r;
}

// GCC 11 misreports the engaged optional below as maybe-uninitialized.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wmaybe-uninitialized"
/// Same computation as characterize_engine without materialising rows: each
/// trial evaluates the charge-sharing sum directly, in the engine's order, so
/// the two paths agree bit for bit.
inline CharacterizeResult characterize_fast(const BankState& bank, const RowGroup& group, unsigned m, PatternKind p,
                                            std::uint32_t random_trials, std::uint64_t seed,
                                            const ExecContext& ctx) {
  const std::uint32_t B = bank.n_bitlines();
  const auto lay = replication_layout(m, static_cast<unsigned>(group.n()));
  const bool biased = bank.profile().biased_senseamps;
  const std::uint8_t bias = bias_bit(bank.polarity(group.first));
  const auto roles = plan_roles(group, lay, biased, bias);
  const std::size_t R = roles.size();
  const AnalogParams& ap = ctx.analog;
  const double half = ap.vdd / 2.0;
  const double up = CellLevel::one().volts(ap.vdd) - half;
  const double down = CellLevel::zero().volts(ap.vdd) - half;
  VariationSample* vs = ctx.variation;
  if (vs && vs->n_bitlines() != B) throw Error(ErrorCode::InvalidArgument, "variation sample width does not match the bank");

  // caps[b * R + i] = C_i on bitline b; den[b] = C_b + sum_i C_i.
  std::vector<double> caps(std::size_t{B} * R), den(B);
  auto load_caps = [&] {
    std::vector<std::span<const float>> mult;
    if (vs)
      for (const auto& r : roles) mult.push_back(vs->cap_multipliers(r.row.value));
    for (std::uint32_t b = 0; b < B; ++b) {
      double d = ap.bitline_capacitance();
      for (std::size_t i = 0; i < R; ++i) {
        double c = mult.empty() ? 1.0 : mult[i][b];
        if (i == 0 && R > 1) c *= ctx.first_row_weight;
        caps[b * R + i] = ap.c_cell_nominal * c;
        d += caps[b * R + i];
      }
      den[b] = d;
    }
  };
  if (vs) vs->set_trial(0);
  load_caps();

  const std::uint32_t trials = pattern_trials(p, m, random_trials);
  CharacterizeResult res{Bits(B, 1), trials, 0.0};
  const double margin = biased ? (bias ? ap.bias_margin : -ap.bias_margin) : 0.0;
  const std::optional<std::uint8_t> tie = biased ? std::optional<std::uint8_t>(bias) : std::nullopt;
  for (std::uint32_t t = 0; t < trials; ++t) {
    std::span<const float> offsets;
    if (vs) {
      vs->set_trial(t);
      if (!ap.static_variation) load_caps();
      offsets = vs->sense_offsets();
    }
    const auto in = trial_inputs(p, m, t, seed, B);
    for (std::uint32_t b = 0; b < B; ++b) {
      unsigned ones = 0;
      for (unsigned j = 0; j < m; ++j) ones += in[j][b];
      double num = 0.0;
      const double* c = &caps[std::size_t{b} * R];
      for (std::size_t i = 0; i < R; ++i) {
        const auto& r = roles[i];
        if (r.kind == RowRole::Kind::Neutral) continue;  // contributes exactly zero
        const std::uint8_t bit = r.kind == RowRole::Kind::Input ? in[r.input][b] : r.fill;
        num += c[i] * (bit ? up : down);
      }
      double offset = offsets.empty() ? 0.0 : offsets[b];
      offset += margin;
      const auto out = sense(num / den[b], offset, tie, ap.sense_threshold);
      res.stable[b] &= out == majority_bit(ones, m);
    }
  }
  std::size_t ok = 0;
  for (auto s : res.stable) ok += s;
  res.success_rate = static_cast<double>(ok) / static_cast<double>(B);
  return res;
}
#pragma GCC diagnostic pop

}  // namespace mrasim
