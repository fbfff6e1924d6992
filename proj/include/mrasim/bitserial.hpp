#pragma once

// Vertical-layout bit-serial arithmetic on majority gates. Every signal is
// kept dual-rail (value and complement) because the substrate has no NOT;
// each MAJ is paired with its dual on the complemented inputs.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mrasim/command_engine.hpp"
#include "mrasim/dram_state.hpp"
#include "mrasim/error.hpp"
#include "mrasim/primitives.hpp"

namespace mrasim {

/// One DRAM row viewed as packed bits, one bit per column.
class BitPlane {
 public:
  BitPlane() = default;
  explicit BitPlane(std::size_t n, bool value = false) : n_(n), w_((n + 63) / 64, value ? ~0ull : 0ull) { trim(); }

  static BitPlane from_bits(std::span<const std::uint8_t> bits) {
    BitPlane p(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) p.w_[i / 64] |= 1ull << (i % 64);
    return p;
  }
  Bits to_bits() const {
    Bits out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = get(i);
    return out;
  }

  std::size_t size() const { return n_; }
  std::span<std::uint64_t> words() { return w_; }
  std::span<const std::uint64_t> words() const { return w_; }
  bool get(std::size_t i) const { return (w_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i, bool v) {
    if (v) w_[i / 64] |= 1ull << (i % 64);
    else w_[i / 64] &= ~(1ull << (i % 64));
  }
  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  BitPlane operator~() const {
    BitPlane r = *this;
    for (auto& w : r.w_) w = ~w;
    r.trim();
    return r;
  }
  BitPlane& operator&=(const BitPlane& o) { return apply(o, [](auto a, auto b) { return a & b; }); }
  BitPlane& operator|=(const BitPlane& o) { return apply(o, [](auto a, auto b) { return a | b; }); }
  BitPlane& operator^=(const BitPlane& o) { return apply(o, [](auto a, auto b) { return a ^ b; }); }
  friend BitPlane operator&(BitPlane a, const BitPlane& b) { return a &= b; }
  friend BitPlane operator|(BitPlane a, const BitPlane& b) { return a |= b; }
  friend BitPlane operator^(BitPlane a, const BitPlane& b) { return a ^= b; }
  friend bool operator==(const BitPlane&, const BitPlane&) = default;

 private:
  template <class F>
  BitPlane& apply(const BitPlane& o, F f) {
    if (o.n_ != n_) throw Error(ErrorCode::InvalidArgument, "bit plane width mismatch");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] = f(w_[i], o.w_[i]);
    return *this;
  }
  void trim() {
    if (n_ % 64 && !w_.empty()) w_.back() &= (1ull << (n_ % 64)) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

/// Majority evaluators. `maj` gets an odd number of equally wide planes.
template <class B>
concept MajBackend = requires(B b, std::span<const BitPlane* const> in) {
  { b.maj(in) } -> std::same_as<BitPlane>;
};

/// Noise-free majority using a bit-sliced population counter.
struct ExactBackend {
  BitPlane maj(std::span<const BitPlane* const> in) const {
    const std::size_t m = in.size();
    BitPlane out(in.front()->size());
    auto ow = out.words();
    const unsigned bits = static_cast<unsigned>(std::bit_width(m));
    const std::size_t thr = m / 2 + 1;
    for (std::size_t w = 0; w < ow.size(); ++w) {
      std::array<std::uint64_t, 8> c{};
      for (const BitPlane* p : in) {
        std::uint64_t carry = p->words()[w];
        for (unsigned k = 0; k < bits && carry; ++k) {
          const std::uint64_t t = c[k] & carry;
          c[k] ^= carry;
          carry = t;
        }
      }
      std::uint64_t gt = 0, eq = ~0ull;
      for (unsigned k = bits; k-- > 0;) {
        if ((thr >> k) & 1u) {
          eq &= c[k];
        } else {
          gt |= eq & c[k];
          eq &= ~c[k];
        }
      }
      ow[w] = gt | eq;
    }
    // Padding bits above size() may be set; clear them through a no-op mask.
    return out & BitPlane(out.size(), true);
  }
};

/// Majority executed as charge-sharing APAs on a simulated bank: inputs are
/// replicated into one row group per arity in subarray 0.
class EngineBackend {
 public:
  EngineBackend(BankState& bank, ExecContext ctx, unsigned n_rows = 0) : bank_(bank), ctx_(ctx), n_rows_(n_rows) {}

  BitPlane maj(std::span<const BitPlane* const> in) {
    const auto m = static_cast<unsigned>(in.size());
    const unsigned n = n_rows_ ? n_rows_ : min_rows_for(m);
    auto it = groups_.find(n);
    if (it == groups_.end()) {
      std::mt19937_64 rng(n);
      auto [a, b] = random_anchor_pair(rng, 0, n, bank_.geometry().decoder);
      it = groups_.emplace(n, nrg(a, b, bank_.geometry().decoder)).first;
    }
    std::vector<Bits> inputs;
    for (const BitPlane* p : in) inputs.push_back(p->to_bits());
    const auto res = mrasim::maj(bank_, inputs, it->second, ctx_);
    return BitPlane::from_bits(res.bits);
  }

 private:
  BankState& bank_;
  ExecContext ctx_;
  unsigned n_rows_;
  std::map<unsigned, RowGroup> groups_;
};

/// Dual-rail signal: `p` holds the value, `n` its complement.
struct Signal {
  BitPlane p;
  BitPlane n;
  Signal operator!() const { return {n, p}; }  // free: swap the rails
  bool consistent() const { return n == ~p; }
};

/// MAJ operation counts per arity (both rails counted).
struct MajOpCount {
  std::map<unsigned, std::uint64_t> maj;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto [m, c] : maj) t += c;
    return t;
  }
  unsigned max_arity() const { return maj.empty() ? 0 : maj.rbegin()->first; }
  MajOpCount& operator+=(const MajOpCount& o) {
    for (auto [m, c] : o.maj) maj[m] += c;
    return *this;
  }
  friend bool operator==(const MajOpCount&, const MajOpCount&) = default;
};

/// Column-major operand storage: bit i of every element lives in plane i,
/// with the complement plane alongside.
struct BitColumnMatrix {
  std::vector<Signal> bits;  // LSB first

  static BitColumnMatrix load(std::span<const std::uint32_t> values, unsigned width = 32) {
    BitColumnMatrix m;
    for (unsigned i = 0; i < width; ++i) {
      BitPlane p(values.size());
      for (std::size_t c = 0; c < values.size(); ++c) p.set(c, (values[c] >> i) & 1u);
      m.bits.push_back({p, ~p});
    }
    return m;
  }
  std::size_t width() const { return bits.size(); }
  std::size_t columns() const { return bits.empty() ? 0 : bits.front().p.size(); }
  std::vector<std::uint32_t> values() const {
    std::vector<std::uint32_t> out(columns(), 0);
    for (std::size_t i = 0; i < bits.size() && i < 32; ++i)
      for (std::size_t c = 0; c < out.size(); ++c)
        if (bits[i].p.get(c)) out[c] |= 1u << i;
    return out;
  }
  bool negation_consistent() const {
    return std::all_of(bits.begin(), bits.end(), [](const Signal& s) { return s.consistent(); });
  }
};

enum class AdderMode : std::uint8_t { Maj5, Maj3 };

/// Logic and arithmetic built only from MAJ gates of arity <= max_arity.
template <MajBackend Backend>
class BitSerialMachine {
 public:
  BitSerialMachine(Backend& backend, unsigned max_arity, std::size_t columns)
      : backend_(backend), max_arity_(max_arity), zero_{BitPlane(columns), BitPlane(columns, true)} {
    if (max_arity < 3 || max_arity % 2 == 0)
      throw Error(ErrorCode::InvalidArity, "max arity must be odd and at least 3");
  }

  unsigned max_arity() const { return max_arity_; }
  const MajOpCount& counts() const { return counts_; }
  void reset_counts() { counts_ = {}; }
  Signal constant(bool v) const { return v ? !zero_ : zero_; }

  Signal maj(std::span<const Signal* const> in) {
    const auto m = static_cast<unsigned>(in.size());
    if (m % 2 == 0 || m < 3) throw Error(ErrorCode::InvalidArity, "MAJ needs an odd input count >= 3");
    if (m > max_arity_)
      throw Error(ErrorCode::ArityUnavailable,
                  "MAJ" + std::to_string(m) + " exceeds max arity " + std::to_string(max_arity_));
    std::vector<const BitPlane*> pp, nn;
    for (const Signal* s : in) {
      pp.push_back(&s->p);
      nn.push_back(&s->n);
    }
    counts_.maj[m] += 2;
    return {backend_.maj(pp), backend_.maj(nn)};
  }
  Signal maj(std::initializer_list<const Signal*> in) { return maj(std::span<const Signal* const>(in.begin(), in.size())); }

  /// AND/OR of up to (max_arity+1)/2 operands in one MAJ.
  Signal and_or(std::span<const Signal> ops, bool is_or) {
    const std::size_t k = ops.size();
    if (k == 1) return ops[0];
    if (2 * k - 1 > max_arity_)
      throw Error(ErrorCode::ArityUnavailable, std::to_string(k) + "-input AND/OR needs MAJ" + std::to_string(2 * k - 1));
    const Signal c = constant(is_or);
    std::vector<const Signal*> in;
    for (const auto& s : ops) in.push_back(&s);
    for (std::size_t i = 1; i < k; ++i) in.push_back(&c);
    return maj(in);
  }

  Signal and_many(std::span<const Signal> ops) { return reduce_fifo(ops, fan_in(), [&](auto chunk) { return and_or(chunk, false); }); }
  Signal or_many(std::span<const Signal> ops) { return reduce_fifo(ops, fan_in(), [&](auto chunk) { return and_or(chunk, true); }); }

  Signal xor2(const Signal& a, const Signal& b) {
    const Signal one = constant(true), zero = constant(false);
    const Signal nb_a = !a, nb_b = !b;
    const Signal x = maj({&a, &b, &one});
    const Signal y = maj({&nb_a, &nb_b, &one});
    return maj({&x, &y, &zero});
  }

  /// Parity of k operands in one wide MAJ: the inputs plus two copies of the
  /// complemented threshold signals [count >= j] for even j, padded to 4*(k/2)+1.
  Signal parity(std::span<const Signal> ops) {
    const auto k = static_cast<unsigned>(ops.size());
    if (k == 1) return ops[0];
    if (k == 2 && max_arity_ < 5) return xor2(ops[0], ops[1]);
    const unsigned half = k / 2;
    std::vector<Signal> thresholds;
    for (unsigned j = 2; j <= 2 * half; j += 2) thresholds.push_back(at_least(ops, j));
    const Signal zero = constant(false);
    std::vector<Signal> nots;
    for (const auto& t : thresholds) nots.push_back(!t);
    std::vector<const Signal*> in;
    for (const auto& s : ops) in.push_back(&s);
    for (const auto& t : nots) {
      in.push_back(&t);
      in.push_back(&t);
    }
    if (k % 2 == 0) in.push_back(&zero);
    return maj(in);
  }

  Signal xor_many(std::span<const Signal> ops) {
    return reduce_fifo(ops, parity_fan_in(), [&](auto chunk) { return parity(chunk); });
  }

  std::pair<Signal, Signal> full_adder(const Signal& a, const Signal& b, const Signal& cin,
                                       std::optional<AdderMode> mode = std::nullopt) {
    const AdderMode md = mode.value_or(max_arity_ >= 5 ? AdderMode::Maj5 : AdderMode::Maj3);
    const Signal cout = maj({&a, &b, &cin});
    const Signal ncout = !cout;
    if (md == AdderMode::Maj5) return {maj({&a, &b, &cin, &ncout, &ncout}), cout};
    const Signal ncin = !cin;
    const Signal t = maj({&a, &b, &ncin});
    return {maj({&ncout, &cin, &t}), cout};
  }

  /// Ripple add of the low `width` planes; returns (sum, carry out).
  std::pair<std::vector<Signal>, Signal> add_planes(std::span<const Signal> a, std::span<const Signal> b, Signal carry) {
    std::vector<Signal> sum;
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto [s, c] = full_adder(a[i], b[i], carry);
      sum.push_back(std::move(s));
      carry = std::move(c);
    }
    return {std::move(sum), std::move(carry)};
  }

  BitColumnMatrix add(const BitColumnMatrix& a, const BitColumnMatrix& b) {
    return {add_planes(a.bits, b.bits, constant(false)).first};
  }

  BitColumnMatrix sub(const BitColumnMatrix& a, const BitColumnMatrix& b) {
    return {add_planes(a.bits, negate(b.bits), constant(true)).first};
  }

  BitColumnMatrix mul(const BitColumnMatrix& a, const BitColumnMatrix& b) {
    const std::size_t w = a.width();
    std::vector<Signal> acc(w, constant(false));
    const Signal zero = constant(false);
    for (std::size_t i = 0; i < w; ++i) {
      // Partial product A << i masked by bit i of B; planes below i are zero.
      std::vector<Signal> part;
      for (std::size_t j = i; j < w; ++j) part.push_back(maj({&a.bits[j - i], &b.bits[i], &zero}));
      std::span<const Signal> hi(acc.begin() + static_cast<std::ptrdiff_t>(i), acc.end());
      auto sum = add_planes(hi, part, constant(false)).first;
      std::copy(sum.begin(), sum.end(), acc.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return {acc};
  }

  /// Unsigned restoring division. A zero divisor yields an all-ones quotient.
  BitColumnMatrix div(const BitColumnMatrix& a, const BitColumnMatrix& b) {
    const std::size_t w = a.width();
    std::vector<Signal> rem(w + 1, constant(false));
    std::vector<Signal> divisor = b.bits;
    divisor.push_back(constant(false));
    const auto ndiv = negate(divisor);
    std::vector<Signal> q(w, constant(false));
    for (std::size_t step = 0; step < w; ++step) {
      const std::size_t i = w - 1 - step;
      std::rotate(rem.rbegin(), rem.rbegin() + 1, rem.rend());
      rem[0] = a.bits[i];
      auto [diff, carry] = add_planes(rem, ndiv, constant(true));
      q[i] = carry;  // no borrow: remainder >= divisor
      for (std::size_t j = 0; j <= w; ++j) rem[j] = mux(carry, diff[j], rem[j]);
    }
    return {q};
  }

  /// sel ? x : y
  Signal mux(const Signal& sel, const Signal& x, const Signal& y) {
    const Signal zero = constant(false), one = constant(true), nsel = !sel;
    const Signal l = maj({&sel, &x, &zero});
    const Signal r = maj({&nsel, &y, &zero});
    return maj({&l, &r, &one});
  }

  unsigned fan_in() const { return (max_arity_ + 1) / 2; }

  /// Largest k whose parity network fits: 4*(k/2)+1 <= max arity.
  unsigned parity_fan_in() const {
    unsigned k = 2;
    while (4 * ((k + 1) / 2) + 1 <= max_arity_) ++k;
    return max_arity_ < 5 ? 2 : k;
  }

 private:
  static std::vector<Signal> negate(std::span<const Signal> s) {
    std::vector<Signal> out;
    for (const auto& x : s) out.push_back(!x);
    return out;
  }

  /// [popcount(ops) >= j] with the fewest constant pads.
  Signal at_least(std::span<const Signal> ops, unsigned j) {
    const auto k = static_cast<unsigned>(ops.size());
    const unsigned ones = 2 * j - 1 >= k ? 0 : k + 1 - 2 * j;
    const unsigned zeros = 2 * j + ones - 1 - k;
    const Signal one = constant(true), zero = constant(false);
    std::vector<const Signal*> in;
    for (const auto& s : ops) in.push_back(&s);
    for (unsigned i = 0; i < ones; ++i) in.push_back(&one);
    for (unsigned i = 0; i < zeros; ++i) in.push_back(&zero);
    return maj(in);
  }

  template <class F>
  Signal reduce_fifo(std::span<const Signal> ops, unsigned g, F op) {
    if (ops.empty()) throw Error(ErrorCode::InvalidArgument, "reduction needs at least one operand");
    std::deque<Signal> q(ops.begin(), ops.end());
    while (q.size() > 1) {
      const std::size_t take = std::min<std::size_t>(g, q.size());
      std::vector<Signal> chunk(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(take));
      q.erase(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(take));
      q.push_back(op(std::span<const Signal>(chunk)));
    }
    return q.front();
  }

  Backend& backend_;
  unsigned max_arity_;
  Signal zero_;
  MajOpCount counts_;
};

// ---- kernels ----

enum class Kernel : std::uint8_t { And, Or, Xor, Add, Sub, Mul, Div };

inline std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::And: return "and";
    case Kernel::Or: return "or";
    case Kernel::Xor: return "xor";
    case Kernel::Add: return "add";
    case Kernel::Sub: return "sub";
    case Kernel::Mul: return "mul";
    case Kernel::Div: return "div";
  }
  return "?";
}

inline Kernel parse_kernel(std::string_view s) {
  for (auto k : {Kernel::And, Kernel::Or, Kernel::Xor, Kernel::Add, Kernel::Sub, Kernel::Mul, Kernel::Div})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(s) + "'");
}

inline bool is_logic(Kernel k) { return k == Kernel::And || k == Kernel::Or || k == Kernel::Xor; }

/// Logic kernels reduce the 32 bit planes of `a` to one plane; arithmetic
/// kernels combine `a` and `b` element-wise.
template <MajBackend Backend>
BitColumnMatrix run_kernel(BitSerialMachine<Backend>& mc, Kernel k, const BitColumnMatrix& a,
                           const BitColumnMatrix& b) {
  switch (k) {
    case Kernel::And: return {{mc.and_many(a.bits)}};
    case Kernel::Or: return {{mc.or_many(a.bits)}};
    case Kernel::Xor: return {{mc.xor_many(a.bits)}};
    case Kernel::Add: return mc.add(a, b);
    case Kernel::Sub: return mc.sub(a, b);
    case Kernel::Mul: return mc.mul(a, b);
    case Kernel::Div: return mc.div(a, b);
  }
  return {};
}

/// Host reference for run_kernel.
inline std::vector<std::uint32_t> kernel_oracle(Kernel k, std::span<const std::uint32_t> a,
                                                std::span<const std::uint32_t> b) {
  std::vector<std::uint32_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    switch (k) {
      case Kernel::And: out[i] = a[i] == 0xffffffffu; break;
      case Kernel::Or: out[i] = a[i] != 0; break;
      case Kernel::Xor: out[i] = std::popcount(a[i]) & 1u; break;
      case Kernel::Add: out[i] = a[i] + b[i]; break;
      case Kernel::Sub: out[i] = a[i] - b[i]; break;
      case Kernel::Mul: out[i] = a[i] * b[i]; break;
      case Kernel::Div: out[i] = b[i] ? a[i] / b[i] : 0xffffffffu; break;
    }
  }
  return out;
}

/// Operation counts are data independent, so a small random run suffices.
inline MajOpCount count_ops(Kernel k, unsigned max_arity) {
  std::mt19937 rng(7);
  std::vector<std::uint32_t> a(64), b(64);
  for (auto& x : a) x = rng();
  for (auto& x : b) x = rng();
  ExactBackend be;
  BitSerialMachine mc(be, max_arity, a.size());
  run_kernel(mc, k, BitColumnMatrix::load(a), BitColumnMatrix::load(b));
  return mc.counts();
}

// ---- performance model ----

enum class Scenario : std::uint8_t { RealExp, RealInit, RealSR, Ideal, EqualLatency };

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::RealExp: return "realexp";
    case Scenario::RealInit: return "realinit";
    case Scenario::RealSR: return "realsr";
    case Scenario::Ideal: return "ideal";
    case Scenario::EqualLatency: return "equal";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view s) {
  for (auto k : {Scenario::RealExp, Scenario::RealInit, Scenario::RealSR, Scenario::Ideal, Scenario::EqualLatency})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + std::string(s) + "'");
}

/// Success rate per (m, n). Missing n falls back to the nearest listed n for
/// the same m (ties toward the larger n).
struct SuccessTable {
  std::map<std::pair<unsigned, unsigned>, double> rates;

  double lookup(unsigned m, unsigned n) const {
    if (auto it = rates.find({m, n}); it != rates.end()) return it->second;
    std::optional<std::pair<int, double>> best;
    for (const auto& [key, v] : rates) {
      if (key.first != m) continue;
      const int d = std::abs(std::countr_zero(key.second) - std::countr_zero(n));
      if (!best || d <= best->first) best = std::pair{d, v};
    }
    if (!best) throw Error(ErrorCode::ArityUnavailable, "no success rate for MAJ" + std::to_string(m));
    return best->second;
  }

  /// Averages reported for the better-characterised manufacturer.
  static SuccessTable published() {
    return {{{{3, 4}, 0.7885}, {{3, 32}, 0.9791}, {{5, 32}, 0.7393}, {{7, 32}, 0.2928}, {{9, 32}, 0.3535}}};
  }
};

/// Per-operation latencies (ns) derived from the canonical command sequences.
struct OpLatencies {
  double maj = 0;   // charge-sharing APA
  double init = 0;  // one input copy (Multi-RowCopy)
  double frac = 0;  // one neutral row

  static OpLatencies from_timing(const TimingParams& t) {
    const RowAddress r0{0}, r1{1};
    return {trace_latency(charge_share_trace(r0, r1, 0, t), t), trace_latency(mrc_trace(r0, r1, 0, t), t),
            trace_latency(frac_trace(r0, 0, t), t)};
  }
};

struct PerfScenario {
  Scenario kind = Scenario::RealExp;
  SuccessTable success = SuccessTable::published();
  OpLatencies latency = OpLatencies::from_timing({});
  std::optional<unsigned> n_rows;  // fixed n; otherwise the best-throughput n per arity

  bool uses_success() const { return kind == Scenario::RealExp || kind == Scenario::RealSR; }
  bool uses_init() const { return kind == Scenario::RealExp || kind == Scenario::RealInit; }
};

/// Expected cost of one MAJ-m on n rows: input copies plus neutral rows plus
/// the APA, repeated 1/p times on average.
inline double op_cost(unsigned m, unsigned n, const PerfScenario& s) {
  const auto lay = replication_layout(m, n);
  double t = s.latency.maj;
  if (s.uses_init()) t += m * s.latency.init + lay.neutrals * s.latency.frac;
  if (!s.uses_success()) return t;
  const double p = s.success.lookup(m, n);
  if (!(p > 0)) throw Error(ErrorCode::ZeroSuccessRate, "success rate of MAJ" + std::to_string(m) + " is zero");
  return t / p;
}

inline unsigned best_rows(unsigned m, const PerfScenario& s) {
  if (s.n_rows && *s.n_rows >= min_rows_for(m)) return *s.n_rows;
  unsigned best = 0;
  double best_cost = 0;
  for (unsigned n = min_rows_for(m); n <= 32; n *= 2) {
    const double c = op_cost(m, n, s);
    if (!best || c < best_cost) {
      best = n;
      best_cost = c;
    }
  }
  return best;
}

inline double model_time(const MajOpCount& counts, const PerfScenario& s) {
  double t = 0;
  for (auto [m, c] : counts.maj) t += static_cast<double>(c) * op_cost(m, best_rows(m, s), s);
  return t;
}

/// The FracDRAM-style reference: MAJ3 on four rows with measured costs. Only
/// the equal-latency study idealises the baseline as well.
inline PerfScenario baseline_of(PerfScenario s) {
  if (s.kind != Scenario::EqualLatency) s.kind = Scenario::RealExp;
  s.n_rows = 4;
  return s;
}

inline double speedup(Kernel k, unsigned max_arity, const PerfScenario& s, const PerfScenario& baseline) {
  return model_time(count_ops(k, 3), baseline) / model_time(count_ops(k, max_arity), s);
}

inline double speedup(Kernel k, unsigned max_arity, const PerfScenario& s) {
  return speedup(k, max_arity, s, baseline_of(s));
}

}  // namespace mrasim
