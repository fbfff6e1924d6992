#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mrasim/analog_model.hpp"
#include "mrasim/dram_state.hpp"
#include "mrasim/error.hpp"
#include "mrasim/row_decoder.hpp"

namespace mrasim {

/// Timing constraints plus the per-command tails used for latency modelling.
/// All values in ns.
struct TimingParams {
  double t_ras = 32.0;
  double t_rp = 13.5;
  double t_violation = 3.0;  // "immediate" threshold for violated gaps
  double t_faw = 25.0;
  unsigned max_acts_in_faw = 4;
  double t_rcd = 13.5;
  double t_wr = 15.0;
  double t_rtp = 7.5;
  double apa_gap = 1.5;        // gap used when a sequence deliberately violates a timing
  double restore_tail = 32.0;  // time for a trailing ACT to finish restoring

  void validate() const {
    if (!(t_violation > 0 && t_rp > 0 && t_ras > 0 && t_faw > 0 && max_acts_in_faw > 0))
      throw Error(ErrorCode::ConfigError, "timing parameters must be positive");
    if (!(t_violation < t_rp && t_rp < t_ras))
      throw Error(ErrorCode::ConfigError, "require t_violation < t_rp < t_ras");
    if (!(apa_gap > 0 && apa_gap < t_violation))
      throw Error(ErrorCode::ConfigError, "apa_gap must be positive and below t_violation");
    if (!(t_rcd > 0 && t_wr > 0 && t_rtp > 0 && restore_tail >= 0))
      throw Error(ErrorCode::ConfigError, "command tails must be positive");
  }
};

struct Command {
  enum class Kind : std::uint8_t { Act, Pre, Write, Read };
  Kind kind = Kind::Act;
  double time = 0.0;
  RowAddress row{};  // ACT only
  Bits data;         // WRITE only; tiled across the row

  static Command act(double t, RowAddress r) { return {Kind::Act, t, r, {}}; }
  static Command pre(double t) { return {Kind::Pre, t, {}, {}}; }
  static Command write(double t, Bits d) { return {Kind::Write, t, {}, std::move(d)}; }
  static Command read(double t) { return {Kind::Read, t, {}, {}}; }
};

using Trace = std::vector<Command>;

inline std::string_view to_string(Command::Kind k) {
  switch (k) {
    case Command::Kind::Act: return "ACT";
    case Command::Kind::Pre: return "PRE";
    case Command::Kind::Write: return "WRITE";
    case Command::Kind::Read: return "READ";
  }
  return "?";
}

// Hex data: byte k of the string covers bitlines 8k..8k+7, least significant
// bit first (same order as the bank dump).
inline Bits parse_hex_bits(std::string_view hex) {
  if (hex.size() % 2 != 0 || hex.empty())
    throw Error(ErrorCode::MalformedTrace, "hex data needs an even, non-zero number of digits");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw Error(ErrorCode::MalformedTrace, std::string("bad hex digit '") + c + "'");
  };
  Bits bits;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const unsigned byte = (nibble(hex[i]) << 4) | nibble(hex[i + 1]);
    for (unsigned k = 0; k < 8; ++k) bits.push_back(static_cast<std::uint8_t>((byte >> k) & 1u));
  }
  return bits;
}

inline std::string format_hex_bits(std::span<const std::uint8_t> bits) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 8) {
    unsigned byte = 0;
    for (unsigned k = 0; k < 8 && i + k < bits.size(); ++k) byte |= static_cast<unsigned>(bits[i + k] & 1u) << k;
    out += digits[byte >> 4];
    out += digits[byte & 15];
  }
  return out;
}

inline std::string format_time(double t) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), t);
  return std::string(buf, end);
}

inline Trace parse_trace(std::istream& is) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string time_s, kind, arg, extra;
    if (!(ls >> time_s)) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(lineno) + ": " + why);
    };
    double t = 0;
    auto [p, ec] = std::from_chars(time_s.data(), time_s.data() + time_s.size(), t);
    if (ec != std::errc{} || p != time_s.data() + time_s.size()) fail("bad time '" + time_s + "'");
    if (!(ls >> kind)) fail("missing command");
    ls >> arg;
    if (ls >> extra) fail("trailing text");
    if (kind == "ACT") {
      std::uint32_t r = 0;
      auto [q, ec2] = std::from_chars(arg.data(), arg.data() + arg.size(), r);
      if (arg.empty() || ec2 != std::errc{} || q != arg.data() + arg.size()) fail("ACT needs a row number");
      trace.push_back(Command::act(t, RowAddress{r}));
    } else if (kind == "PRE" || kind == "READ") {
      if (!arg.empty()) fail(kind + " takes no argument");
      trace.push_back(kind == "PRE" ? Command::pre(t) : Command::read(t));
    } else if (kind == "WRITE") {
      if (arg.empty()) fail("WRITE needs hex data");
      trace.push_back(Command::write(t, parse_hex_bits(arg)));
    } else {
      fail("unknown command '" + kind + "'");
    }
  }
  return trace;
}

inline void write_trace(std::ostream& os, std::span<const Command> trace) {
  for (const auto& c : trace) {
    os << format_time(c.time) << ' ' << to_string(c.kind);
    if (c.kind == Command::Kind::Act) os << ' ' << c.row.value;
    if (c.kind == Command::Kind::Write) os << ' ' << format_hex_bits(c.data);
    os << '\n';
  }
}

enum class ApaRegime : std::uint8_t { Normal, Mrc, ChargeShare, Undefined };

inline std::string_view to_string(ApaRegime r) {
  switch (r) {
    case ApaRegime::Normal: return "NORMAL";
    case ApaRegime::Mrc: return "MRC";
    case ApaRegime::ChargeShare: return "CHARGE_SHARE";
    case ApaRegime::Undefined: return "UNDEFINED";
  }
  return "?";
}

/// gap1 = t(PRE) - t(ACT first), gap2 = t(ACT second) - t(PRE).
inline ApaRegime classify_apa(double gap1, double gap2, const TimingParams& t) {
  if (!(gap1 > 0 && gap2 > 0)) throw Error(ErrorCode::InvalidArgument, "APA gaps must be positive");
  if (gap1 >= t.t_ras && gap2 >= t.t_rp) return ApaRegime::Normal;
  if (gap1 >= t.t_ras && gap2 < t.t_violation) return ApaRegime::Mrc;
  if (gap1 < t.t_violation && gap2 < t.t_violation) return ApaRegime::ChargeShare;
  return ApaRegime::Undefined;
}

struct ExecContext {
  TimingParams timing{};
  AnalogParams analog{};
  VariationSample* variation = nullptr;  // null: nominal cells, no sense offsets
  double first_row_weight = 1.0;         // share of the first row's charge in CHARGE_SHARE
};

struct Event {
  double time = 0.0;
  std::string kind;
  std::vector<RowAddress> rows;
  std::string detail;
};

struct ExecResult {
  std::vector<Event> events;
  std::vector<Bits> reads;
};

inline void write_events_csv(std::ostream& os, std::span<const Event> events) {
  os << "time,event,rows,detail\n";
  for (const auto& e : events) {
    os << format_time(e.time) << ',' << e.kind << ',';
    for (std::size_t i = 0; i < e.rows.size(); ++i) os << (i ? ";" : "") << e.rows[i].value;
    os << ',' << e.detail << '\n';
  }
}

namespace detail {

/// Senses the bitlines with `rows` connected and restores every connected
/// cell to the sensed value. `rows.front()` is the first-activated row.
inline Bits sense_and_restore(BankState& bank, std::span<const RowAddress> rows, const ExecContext& ctx) {
  const std::uint32_t B = bank.n_bitlines();
  const AnalogParams& p = ctx.analog;
  const bool biased = bank.profile().biased_senseamps;
  const std::uint8_t bias = bias_bit(bank.polarity(rows.front()));
  std::vector<std::span<const float>> caps;
  std::span<const float> offsets;
  if (ctx.variation) {
    if (ctx.variation->n_bitlines() != B)
      throw Error(ErrorCode::InvalidArgument, "variation sample width does not match the bank");
    for (RowAddress r : rows) caps.push_back(ctx.variation->cap_multipliers(r.value));
    offsets = ctx.variation->sense_offsets();
  }
  std::vector<const Row*> cells;
  for (RowAddress r : rows) cells.push_back(&bank.row(r));
  std::vector<CellCharge> charges(rows.size());
  Bits out(B);
  for (std::uint32_t b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double cap = caps.empty() ? 1.0 : caps[i][b];
      if (i == 0 && rows.size() > 1) cap *= ctx.first_row_weight;
      charges[i] = {(*cells[i])[b].volts(p.vdd), cap};
    }
    double offset = offsets.empty() ? 0.0 : offsets[b];
    if (biased) offset += bias ? p.bias_margin : -p.bias_margin;
    const double dev = charge_share(charges, p);
    out[b] = sense(dev, offset, biased ? std::optional<std::uint8_t>(bias) : std::nullopt, p.sense_threshold);
  }
  for (RowAddress r : rows) bank.fill_row(r, out);
  return out;
}

inline Bits tile(std::span<const std::uint8_t> pattern, std::uint32_t width) {
  if (pattern.empty()) throw Error(ErrorCode::MalformedTrace, "empty WRITE data");
  Bits out(width);
  for (std::uint32_t b = 0; b < width; ++b) out[b] = pattern[b % pattern.size()];
  return out;
}

}  // namespace detail

/// Replays `trace` against `bank`. The APA regime is decided when a PRE is
/// followed by an ACT sooner than tRP; the first ACT is only sensed on its own
/// when the sequence lets it (nominal access or MRC).
inline ExecResult execute(BankState& bank, std::span<const Command> trace, const ExecContext& ctx = {}) {
  ctx.timing.validate();
  const TimingParams& tp = ctx.timing;
  const DecoderLayout& layout = bank.geometry().decoder;
  ExecResult res;

  struct Pending {
    RowAddress row;
    double time;
    bool sensed;
    bool multi;  // opened by an APA
  };
  std::optional<Pending> open;

  auto resolve = [&] {
    if (!open || open->sensed) return;
    const RowAddress r = open->row;
    const Bits bits = detail::sense_and_restore(bank, std::span(&r, 1), ctx);
    bank.open({r}, bits);
    open->sensed = true;
  };

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Command& c = trace[i];
    if (c.time < 0 || (i > 0 && !(c.time > trace[i - 1].time)))
      throw Error(ErrorCode::MalformedTrace, "command times must be non-negative and strictly increasing");
    switch (c.kind) {
      case Command::Kind::Act: {
        if (open)
          throw Error(ErrorCode::ProtocolViolation,
                      "ACT " + std::to_string(c.row.value) + " while a row is open");
        bank.check_row(c.row);
        open = Pending{c.row, c.time, false, false};
        res.events.push_back({c.time, "ACT", {c.row}, ""});
        break;
      }
      case Command::Kind::Pre: {
        if (!open) {
          res.events.push_back({c.time, "PRE", {}, "bank already closed"});
          break;
        }
        const double gap1 = c.time - open->time;
        const bool next_act = i + 1 < trace.size() && trace[i + 1].kind == Command::Kind::Act;
        if (next_act && trace[i + 1].time - c.time < tp.t_rp) {
          const Command& second = trace[i + 1];
          if (second.time <= c.time)
            throw Error(ErrorCode::MalformedTrace, "command times must be strictly increasing");
          if (open->multi)
            throw Error(ErrorCode::TooManyLatched, "only a single ACT-PRE-ACT sequence can be chained");
          bank.check_row(second.row);
          const double gap2 = second.time - c.time;
          const ApaRegime regime = classify_apa(gap1, gap2, tp);
          if (regime == ApaRegime::Undefined || (regime == ApaRegime::ChargeShare && open->sensed))
            throw Error(ErrorCode::UndefinedTimingRegime,
                        "APA gaps " + format_time(gap1) + " ns / " + format_time(gap2) + " ns");
          const RowGroup group = nrg(open->row, second.row, layout);
          std::vector<RowAddress> rows = group.rows;
          // First-activated row leads; sense_and_restore reads its polarity and weight.
          std::stable_partition(rows.begin(), rows.end(), [&](RowAddress r) { return r == open->row; });
          Bits latched;
          if (regime == ApaRegime::Mrc) {
            resolve();
            latched = bank.senseamp();
            for (RowAddress r : rows) bank.fill_row(r, latched);
          } else if (i + 2 < trace.size() && trace[i + 2].kind == Command::Kind::Write) {
            // Bulk-Write: the write drivers overpower the shared charge.
            latched.assign(bank.n_bitlines(), 0);
          } else {
            latched = detail::sense_and_restore(bank, rows, ctx);
          }
          bank.open(group.rows, latched);
          open = Pending{second.row, second.time, true, true};
          res.events.push_back({c.time, "PRE", {}, "interrupted"});
          res.events.push_back({second.time, "ACT", group.rows, std::string(to_string(regime))});
          ++i;
          break;
        }
        if (gap1 >= tp.t_ras) {
          resolve();
          bank.close();
          open.reset();
          res.events.push_back({c.time, "PRE", {}, ""});
        } else if (gap1 < tp.t_violation && !open->sensed && !open->multi) {
          bank.fill_row(open->row, CellLevel::neutral());
          res.events.push_back({c.time, "PRE", {open->row}, "FRAC"});
          bank.close();
          open.reset();
        } else {
          throw Error(ErrorCode::UndefinedTimingRegime,
                      "PRE " + format_time(gap1) + " ns after ACT truncates restoration");
        }
        break;
      }
      case Command::Kind::Write: {
        if (!open) throw Error(ErrorCode::WriteWhileClosed, "WRITE at " + format_time(c.time));
        resolve();
        bank.drive_open_rows(detail::tile(c.data, bank.n_bitlines()));
        res.events.push_back({c.time, "WRITE", bank.open_rows(),
                              bank.open_rows().size() > 1 ? "BULK_WRITE" : ""});
        break;
      }
      case Command::Kind::Read: {
        if (!open) throw Error(ErrorCode::ProtocolViolation, "READ while the bank is closed");
        resolve();
        res.reads.push_back(bank.senseamp());
        res.events.push_back({c.time, "READ", bank.open_rows(), format_hex_bits(bank.senseamp())});
        break;
      }
    }
  }
  resolve();
  return res;
}

/// ACT and an immediate PRE: restoration is cut short and the row settles at
/// Vdd/2.
inline void frac(BankState& bank, RowAddress row, const ExecContext& ctx = {}) {
  if (!bank.is_closed()) throw Error(ErrorCode::ProtocolViolation, "frac needs a closed bank");
  const Trace t{Command::act(0.0, row), Command::pre(ctx.timing.apa_gap)};
  execute(bank, t, ctx);
}

struct FawViolation {
  double window_start = 0.0;
  unsigned acts = 0;
};

/// Windows [t_ACT, t_ACT + tFAW) holding more ACTs than allowed.
inline std::vector<FawViolation> check_power(std::span<const Command> trace, const TimingParams& t) {
  std::vector<double> acts;
  for (const auto& c : trace)
    if (c.kind == Command::Kind::Act) acts.push_back(c.time);
  std::sort(acts.begin(), acts.end());
  std::vector<FawViolation> out;
  std::size_t hi = 0;
  for (std::size_t lo = 0; lo < acts.size(); ++lo) {
    hi = std::max(hi, lo);
    while (hi < acts.size() && acts[hi] < acts[lo] + t.t_faw) ++hi;
    const auto n = static_cast<unsigned>(hi - lo);
    if (n > t.max_acts_in_faw) out.push_back({acts[lo], n});
  }
  return out;
}

inline double command_tail(Command::Kind k, const TimingParams& t) {
  switch (k) {
    case Command::Kind::Act: return t.restore_tail;
    case Command::Kind::Pre: return t.t_rp;
    case Command::Kind::Write: return t.t_wr;
    case Command::Kind::Read: return t.t_rtp;
  }
  return 0.0;
}

/// Time at which the last command of the trace has completed.
inline double trace_latency(std::span<const Command> trace, const TimingParams& t) {
  if (trace.empty()) return 0.0;
  const Command& last = trace.back();
  return last.time + command_tail(last.kind, t);
}

// Canonical command sequences, relative to `t0`.

/// ACT, WRITE, PRE at nominal timing.
inline Trace nominal_write_trace(RowAddress row, Bits data, double t0, const TimingParams& t) {
  const double w = t0 + t.t_rcd;
  return {Command::act(t0, row), Command::write(w, std::move(data)),
          Command::pre(t0 + std::max(t.t_ras, t.t_rcd + t.t_wr))};
}

/// APA that copies `first` into its whole row group, then closes the bank.
inline Trace mrc_trace(RowAddress first, RowAddress second, double t0, const TimingParams& t) {
  const double a2 = t0 + t.t_ras + t.apa_gap;
  return {Command::act(t0, first), Command::pre(t0 + t.t_ras), Command::act(a2, second),
          Command::pre(a2 + t.restore_tail)};
}

/// APA in the charge-sharing regime, then closes the bank.
inline Trace charge_share_trace(RowAddress first, RowAddress second, double t0, const TimingParams& t) {
  const double a2 = t0 + 2 * t.apa_gap;
  return {Command::act(t0, first), Command::pre(t0 + t.apa_gap), Command::act(a2, second),
          Command::pre(a2 + t.restore_tail)};
}

/// Charge-sharing APA followed by a WRITE that lands in every open row.
inline Trace bulk_write_trace(RowAddress first, RowAddress second, Bits data, double t0, const TimingParams& t) {
  const double a2 = t0 + 2 * t.apa_gap;
  return {Command::act(t0, first), Command::pre(t0 + t.apa_gap), Command::act(a2, second),
          Command::write(a2 + t.t_rcd, std::move(data)),
          Command::pre(a2 + std::max(t.restore_tail, t.t_rcd + t.t_wr))};
}

inline Trace frac_trace(RowAddress row, double t0, const TimingParams& t) {
  return {Command::act(t0, row), Command::pre(t0 + t.apa_gap)};
}

}  // namespace mrasim
