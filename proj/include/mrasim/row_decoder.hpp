#pragma once

// Hierarchical row decoder: a global wordline decoder picks the subarray from
// the high address bits; inside the subarray a set of predecoders (A, B, C,
// ...) each decode a small bit field and latch their one-hot outputs. A PRE
// that is interrupted by the next ACT leaves the old outputs latched, so the
// local wordline tree asserts the Cartesian product of everything latched.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mrasim/error.hpp"

namespace mrasim {

struct RowAddress {
  std::uint32_t value = 0;

  constexpr RowAddress() = default;
  constexpr explicit RowAddress(std::uint32_t v) : value(v) {}
  friend constexpr auto operator<=>(RowAddress, RowAddress) = default;
};

inline constexpr std::size_t kMaxPredecoders = 8;

/// Bit split of the row address. Predecoder i decodes `group_widths[i]` bits,
/// fields packed from bit 0 upward; the subarray index sits above them.
struct DecoderLayout {
  std::vector<unsigned> group_widths{1, 2, 2, 2, 2};
  unsigned subarray_bits = 7;

  unsigned local_bits() const {
    return std::accumulate(group_widths.begin(), group_widths.end(), 0u);
  }
  std::uint32_t subarray_size() const { return 1u << local_bits(); }
  std::uint32_t n_subarrays() const { return 1u << subarray_bits; }
  std::uint32_t n_rows() const { return subarray_size() * n_subarrays(); }
  std::size_t n_groups() const { return group_widths.size(); }

  unsigned group_lsb(std::size_t g) const {
    unsigned lsb = 0;
    for (std::size_t i = 0; i < g; ++i) lsb += group_widths[i];
    return lsb;
  }
  unsigned group_outputs(std::size_t g) const { return 1u << group_widths[g]; }
  unsigned total_outputs() const {
    unsigned sum = 0;
    for (std::size_t g = 0; g < n_groups(); ++g) sum += group_outputs(g);
    return sum;
  }

  void validate() const {
    if (group_widths.empty() || group_widths.size() > kMaxPredecoders)
      throw Error(ErrorCode::ConfigError, "predecoder count must be in 1.." +
                                              std::to_string(kMaxPredecoders));
    for (unsigned w : group_widths)
      if (w == 0 || w > 4)
        throw Error(ErrorCode::ConfigError, "predecoder width must be in 1..4 bits");
    if (local_bits() + subarray_bits > 24)
      throw Error(ErrorCode::ConfigError, "row address wider than 24 bits");
  }

  friend bool operator==(const DecoderLayout&, const DecoderLayout&) = default;
};

inline char group_name(std::size_t g) { return static_cast<char>('A' + g); }

struct PredecoderSelect {
  std::uint8_t group = 0;
  std::uint8_t index = 0;
  friend constexpr bool operator==(PredecoderSelect, PredecoderSelect) = default;
};

struct DecodedAddress {
  std::uint32_t subarray = 0;
  std::vector<PredecoderSelect> selects;  // one per predecoder, in group order

  std::string to_string() const {
    std::string out;
    for (const auto& s : selects) {
      if (!out.empty()) out += ',';
      out += group_name(s.group);
      out += std::to_string(s.index);
    }
    return out;
  }
};

inline DecodedAddress decode_address(RowAddress ra, const DecoderLayout& layout = {}) {
  DecodedAddress out;
  const unsigned local = layout.local_bits();
  out.subarray = (ra.value >> local) & ((1u << layout.subarray_bits) - 1);
  unsigned lsb = 0;
  for (std::size_t g = 0; g < layout.n_groups(); ++g) {
    const unsigned w = layout.group_widths[g];
    out.selects.push_back({static_cast<std::uint8_t>(g),
                           static_cast<std::uint8_t>((ra.value >> lsb) & ((1u << w) - 1))});
    lsb += w;
  }
  return out;
}

/// Inverse of decode_address.
inline RowAddress assemble_address(std::uint32_t subarray, const std::vector<std::uint8_t>& indices,
                                   const DecoderLayout& layout = {}) {
  std::uint32_t v = subarray << layout.local_bits();
  unsigned lsb = 0;
  for (std::size_t g = 0; g < layout.n_groups(); ++g) {
    v |= static_cast<std::uint32_t>(indices[g]) << lsb;
    lsb += layout.group_widths[g];
  }
  return RowAddress{v};
}

/// Per-predecoder latched outputs (bit i of `latched[g]` = output i latched)
/// plus the latched global wordline.
struct PredecoderLatchState {
  std::array<std::uint16_t, kMaxPredecoders> latched{};
  std::optional<std::uint32_t> gwl;

  bool empty() const { return !gwl.has_value(); }

  std::vector<unsigned> indices(std::size_t g) const {
    std::vector<unsigned> out;
    for (unsigned i = 0; i < 16; ++i)
      if (latched[g] & (1u << i)) out.push_back(i);
    return out;
  }

  friend bool operator==(const PredecoderLatchState&, const PredecoderLatchState&) = default;
};

/// One ACT reaching the decoder. `reset` is true when the preceding PRE was
/// honoured and cleared the latches.
inline PredecoderLatchState latch(const PredecoderLatchState& state, RowAddress ra, bool reset,
                                  const DecoderLayout& layout = {}) {
  PredecoderLatchState next = reset ? PredecoderLatchState{} : state;
  const DecodedAddress d = decode_address(ra, layout);
  if (next.gwl && *next.gwl != d.subarray)
    throw Error(ErrorCode::CrossSubarray, "row " + std::to_string(ra.value) + " is in subarray " +
                                              std::to_string(d.subarray) + ", latched GWL is " +
                                              std::to_string(*next.gwl));
  next.gwl = d.subarray;
  for (const auto& s : d.selects) {
    next.latched[s.group] |= static_cast<std::uint16_t>(1u << s.index);
    if (std::popcount(next.latched[s.group]) > 2)
      throw Error(ErrorCode::TooManyLatched,
                  std::string("predecoder ") + group_name(s.group) + " would latch three outputs");
  }
  return next;
}

/// Rows whose local wordline is asserted: product over groups of the latched
/// outputs, ascending.
inline std::vector<RowAddress> activated_rows(const PredecoderLatchState& state,
                                              const DecoderLayout& layout = {}) {
  if (state.empty()) throw Error(ErrorCode::InvalidArgument, "no address latched");
  std::vector<RowAddress> rows{RowAddress{*state.gwl << layout.local_bits()}};
  unsigned lsb = 0;
  for (std::size_t g = 0; g < layout.n_groups(); ++g) {
    std::vector<RowAddress> next;
    for (RowAddress base : rows)
      for (unsigned idx : state.indices(g)) next.push_back(RowAddress{base.value | (idx << lsb)});
    rows = std::move(next);
    lsb += layout.group_widths[g];
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

/// The N-row group opened together by one ACT first -> PRE -> ACT second.
struct RowGroup {
  std::vector<RowAddress> rows;  // ascending
  RowAddress first;
  RowAddress second;

  std::size_t n() const { return rows.size(); }
  bool contains(RowAddress r) const { return std::binary_search(rows.begin(), rows.end(), r); }
  friend bool operator==(const RowGroup&, const RowGroup&) = default;
};

inline unsigned differing_groups(RowAddress r1, RowAddress r2, const DecoderLayout& layout = {}) {
  const auto d1 = decode_address(r1, layout);
  const auto d2 = decode_address(r2, layout);
  unsigned k = 0;
  for (std::size_t g = 0; g < layout.n_groups(); ++g)
    k += d1.selects[g].index != d2.selects[g].index;
  return k;
}

inline RowGroup nrg(RowAddress first, RowAddress second, const DecoderLayout& layout = {}) {
  auto state = latch(PredecoderLatchState{}, first, true, layout);
  state = latch(state, second, false, layout);
  return RowGroup{activated_rows(state, layout), first, second};
}

/// For every group size n (power of two), the number of ordered pairs
/// (r1 != r2) inside one subarray that open n rows.
struct NrgCensus {
  std::map<std::uint32_t, std::uint64_t> pairs;
  std::uint64_t total = 0;

  double fraction(std::uint32_t n) const {
    auto it = pairs.find(n);
    return it == pairs.end() || total == 0 ? 0.0
                                           : static_cast<double>(it->second) / static_cast<double>(total);
  }
};

/// Counts by convolving per-group (same, different) ordered-pair counts, so
/// the cost is independent of the subarray size.
inline NrgCensus nrg_census(const DecoderLayout& layout = {}) {
  std::vector<std::uint64_t> by_k{1};
  for (std::size_t g = 0; g < layout.n_groups(); ++g) {
    const std::uint64_t outs = layout.group_outputs(g);
    const std::uint64_t same = outs;
    const std::uint64_t diff = outs * (outs - 1);
    std::vector<std::uint64_t> next(by_k.size() + 1, 0);
    for (std::size_t k = 0; k < by_k.size(); ++k) {
      next[k] += by_k[k] * same;
      next[k + 1] += by_k[k] * diff;
    }
    by_k = std::move(next);
  }
  NrgCensus census;
  for (std::size_t k = 1; k < by_k.size(); ++k) {
    census.pairs[1u << k] = by_k[k];
    census.total += by_k[k];
  }
  return census;
}

/// All distinct row groups of size <= max_n inside `subarray`, keyed by
/// their canonical anchor pair (lowest row, highest row), ascending.
inline std::vector<RowGroup> enumerate_groups(std::uint32_t subarray, std::uint32_t max_n,
                                              const DecoderLayout& layout = {}) {
  // Per group: every single output and every pair of outputs.
  std::vector<std::vector<std::uint16_t>> choices(layout.n_groups());
  for (std::size_t g = 0; g < layout.n_groups(); ++g) {
    const unsigned outs = layout.group_outputs(g);
    for (unsigned a = 0; a < outs; ++a) {
      choices[g].push_back(static_cast<std::uint16_t>(1u << a));
      for (unsigned b = a + 1; b < outs; ++b)
        choices[g].push_back(static_cast<std::uint16_t>((1u << a) | (1u << b)));
    }
  }
  std::vector<RowGroup> out;
  std::vector<std::size_t> pick(layout.n_groups(), 0);
  while (true) {
    PredecoderLatchState st;
    st.gwl = subarray;
    std::uint32_t n = 1;
    for (std::size_t g = 0; g < layout.n_groups(); ++g) {
      st.latched[g] = choices[g][pick[g]];
      n *= static_cast<std::uint32_t>(std::popcount(st.latched[g]));
    }
    if (n <= max_n) {
      auto rows = activated_rows(st, layout);
      RowAddress lo = rows.front(), hi = rows.back();
      out.push_back(RowGroup{std::move(rows), lo, hi});
    }
    std::size_t g = 0;
    while (g < pick.size() && ++pick[g] == choices[g].size()) pick[g++] = 0;
    if (g == pick.size()) break;
  }
  std::sort(out.begin(), out.end(), [](const RowGroup& a, const RowGroup& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });
  return out;
}

/// Draws an anchor pair opening exactly n rows in `subarray`: log2(n)
/// predecoders get two different outputs, the rest agree.
template <class Rng>
std::pair<RowAddress, RowAddress> random_anchor_pair(Rng& rng, std::uint32_t subarray, std::uint32_t n,
                                                     const DecoderLayout& layout = {}) {
  if (!std::has_single_bit(n))
    throw Error(ErrorCode::InvalidArgument, "group size must be a power of two");
  const auto k = static_cast<std::size_t>(std::countr_zero(n));
  if (k > layout.n_groups())
    throw Error(ErrorCode::InvalidArgument,
                "group size " + std::to_string(n) + " exceeds decoder capability");
  std::vector<std::size_t> groups(layout.n_groups());
  std::iota(groups.begin(), groups.end(), 0);
  std::shuffle(groups.begin(), groups.end(), rng);
  std::vector<std::uint8_t> a(layout.n_groups()), b(layout.n_groups());
  for (std::size_t g = 0; g < layout.n_groups(); ++g) {
    std::uniform_int_distribution<unsigned> pick(0, layout.group_outputs(g) - 1);
    a[g] = static_cast<std::uint8_t>(pick(rng));
    b[g] = a[g];
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t g = groups[i];
    std::uniform_int_distribution<unsigned> pick(1, layout.group_outputs(g) - 1);
    b[g] = static_cast<std::uint8_t>((a[g] + pick(rng)) % layout.group_outputs(g));
  }
  return {assemble_address(subarray, a, layout), assemble_address(subarray, b, layout)};
}

/// Second anchor for a group that must start its APA at `first`: every
/// predecoder holding two outputs switches to the one `first` lacks.
inline RowAddress partner_of(const RowGroup& group, RowAddress first, const DecoderLayout& layout = {}) {
  auto lo = decode_address(group.first, layout);
  auto hi = decode_address(group.second, layout);
  auto me = decode_address(first, layout);
  std::vector<std::uint8_t> out(layout.n_groups());
  for (std::size_t g = 0; g < layout.n_groups(); ++g) {
    const auto l = lo.selects[g].index, h = hi.selects[g].index, m = me.selects[g].index;
    out[g] = (l == h) ? m : (m == l ? h : l);
  }
  return assemble_address(me.subarray, out, layout);
}

}  // namespace mrasim
