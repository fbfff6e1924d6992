#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mrasim/error.hpp"
#include "mrasim/row_decoder.hpp"

namespace mrasim {

using Bits = std::vector<std::uint8_t>;  // one 0/1 value per bitline

struct CellLevel {
  enum class Kind : std::uint8_t { Zero = 0, One = 1, Neutral = 2, Analog = 3 };

  Kind kind = Kind::Zero;
  float analog_volts = 0.0f;  // meaningful only for Kind::Analog

  static constexpr CellLevel zero() { return {Kind::Zero, 0.0f}; }
  static constexpr CellLevel one() { return {Kind::One, 0.0f}; }
  static constexpr CellLevel neutral() { return {Kind::Neutral, 0.0f}; }
  static CellLevel analog(double volts, double vdd) {
    if (volts < 0.0 || volts > vdd)
      throw Error(ErrorCode::InvalidArgument, "analog level outside [0, Vdd]");
    return {Kind::Analog, static_cast<float>(volts)};
  }
  static constexpr CellLevel from_bit(std::uint8_t bit) { return bit ? one() : zero(); }

  double volts(double vdd) const {
    switch (kind) {
      case Kind::Zero: return 0.0;
      case Kind::One: return vdd;
      case Kind::Neutral: return vdd / 2.0;
      case Kind::Analog: return analog_volts;
    }
    return 0.0;
  }
  bool resolved() const { return kind == Kind::Zero || kind == Kind::One; }

  friend bool operator==(const CellLevel& a, const CellLevel& b) {
    return a.kind == b.kind && (a.kind != Kind::Analog || a.analog_volts == b.analog_volts);
  }
};

using Row = std::vector<CellLevel>;

struct Geometry {
  DecoderLayout decoder{};
  std::uint32_t n_bitlines = 65536;

  std::uint32_t n_subarrays() const { return decoder.n_subarrays(); }
  std::uint32_t subarray_size() const { return decoder.subarray_size(); }
  std::uint32_t n_rows() const { return decoder.n_rows(); }
  std::uint32_t subarray_of(RowAddress r) const { return r.value >> decoder.local_bits(); }
  RowAddress subarray_base(std::uint32_t s) const { return RowAddress{s << decoder.local_bits()}; }

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

enum class Polarity : std::uint8_t { TrueCell, AntiCell };
enum class PolarityRule : std::uint8_t { Alternating, AllTrue, AllAnti };

/// Bit an idle-biased sense amplifier settles to when the bitline carries no
/// deviation at all.
inline std::uint8_t bias_bit(Polarity p) { return p == Polarity::AntiCell ? 1 : 0; }

struct BankProfile {
  // Sense amplifiers resolve a zero deviation to the row's polarity bias
  // instead of failing; such modules also lack the Frac operation.
  bool biased_senseamps = false;
};

struct DataPattern {
  enum class Kind { AllOnes, AllZeros, Random, Explicit };
  Kind kind = Kind::AllZeros;
  std::uint64_t seed = 0;
  Bits bits;

  static DataPattern ones() { return {Kind::AllOnes, 0, {}}; }
  static DataPattern zeros() { return {Kind::AllZeros, 0, {}}; }
  static DataPattern random(std::uint64_t seed) { return {Kind::Random, seed, {}}; }
  static DataPattern explicit_bits(Bits b) { return {Kind::Explicit, 0, std::move(b)}; }
};

/// Random row content depends only on (seed, row), never on which other rows
/// are initialised in the same call.
inline Bits random_row_bits(std::uint64_t seed, RowAddress row, std::uint32_t n_bitlines) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    row.value, 0x5eedu};
  std::mt19937_64 gen(seq);
  Bits out(n_bitlines);
  std::uint64_t word = 0;
  for (std::uint32_t b = 0; b < n_bitlines; ++b) {
    if (b % 64 == 0) word = gen();
    out[b] = static_cast<std::uint8_t>((word >> (b % 64)) & 1u);
  }
  return out;
}

inline Bits pattern_bits(const DataPattern& p, RowAddress row, std::uint32_t n_bitlines) {
  switch (p.kind) {
    case DataPattern::Kind::AllOnes: return Bits(n_bitlines, 1);
    case DataPattern::Kind::AllZeros: return Bits(n_bitlines, 0);
    case DataPattern::Kind::Random: return random_row_bits(p.seed, row, n_bitlines);
    case DataPattern::Kind::Explicit:
      if (p.bits.size() != n_bitlines)
        throw Error(ErrorCode::InvalidArgument, "explicit pattern has " + std::to_string(p.bits.size()) +
                                                    " bits, row has " + std::to_string(n_bitlines));
      return p.bits;
  }
  return {};
}

/// One DRAM bank. Rows are materialised lazily; untouched rows hold zeros.
class BankState {
 public:
  explicit BankState(Geometry geometry = {}, BankProfile profile = {},
                     PolarityRule polarity = PolarityRule::Alternating, double vdd = 1.2)
      : geometry_(std::move(geometry)),
        profile_(profile),
        vdd_(vdd),
        default_row_(geometry_.n_bitlines, CellLevel::zero()),
        senseamp_(geometry_.n_bitlines, 0) {
    geometry_.decoder.validate();
    if (geometry_.n_bitlines == 0) throw Error(ErrorCode::ConfigError, "bank needs at least one bitline");
    polarity_.resize(geometry_.n_rows());
    for (std::uint32_t r = 0; r < geometry_.n_rows(); ++r) {
      switch (polarity) {
        case PolarityRule::Alternating:
          polarity_[r] = (r % 2 == 0) ? Polarity::TrueCell : Polarity::AntiCell;
          break;
        case PolarityRule::AllTrue: polarity_[r] = Polarity::TrueCell; break;
        case PolarityRule::AllAnti: polarity_[r] = Polarity::AntiCell; break;
      }
    }
  }

  const Geometry& geometry() const { return geometry_; }
  const BankProfile& profile() const { return profile_; }
  double vdd() const { return vdd_; }
  std::uint32_t n_bitlines() const { return geometry_.n_bitlines; }

  void check_row(RowAddress r) const {
    if (r.value >= geometry_.n_rows())
      throw Error(ErrorCode::RowOutOfRange, "row " + std::to_string(r.value) + " >= " +
                                                std::to_string(geometry_.n_rows()));
  }

  Polarity polarity(RowAddress r) const {
    check_row(r);
    return polarity_[r.value];
  }

  const Row& row(RowAddress r) const {
    check_row(r);
    auto it = rows_.find(r.value);
    return it == rows_.end() ? default_row_ : it->second;
  }

  Row& mutable_row(RowAddress r) {
    check_row(r);
    auto it = rows_.find(r.value);
    if (it == rows_.end()) it = rows_.emplace(r.value, default_row_).first;
    return it->second;
  }

  void fill_row(RowAddress r, std::span<const std::uint8_t> bits) {
    if (bits.size() != geometry_.n_bitlines)
      throw Error(ErrorCode::InvalidArgument, "row data width mismatch");
    Row& row = mutable_row(r);
    for (std::size_t b = 0; b < bits.size(); ++b) row[b] = CellLevel::from_bit(bits[b]);
  }

  void fill_row(RowAddress r, CellLevel level) {
    Row& row = mutable_row(r);
    std::fill(row.begin(), row.end(), level);
  }

  bool is_closed() const { return open_rows_.empty(); }
  const std::vector<RowAddress>& open_rows() const { return open_rows_; }
  const Bits& senseamp() const { return senseamp_; }
  bool senseamp_enabled() const { return senseamp_enabled_; }

  /// Opens `rows` with the sense amplifiers latched to `latched`.
  void open(std::vector<RowAddress> rows, Bits latched) {
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "open needs at least one row");
    const auto sa = geometry_.subarray_of(rows.front());
    for (RowAddress r : rows) {
      check_row(r);
      if (geometry_.subarray_of(r) != sa)
        throw Error(ErrorCode::CrossSubarray, "open rows span subarrays");
    }
    if (latched.size() != geometry_.n_bitlines)
      throw Error(ErrorCode::InvalidArgument, "sense amplifier width mismatch");
    std::sort(rows.begin(), rows.end());
    open_rows_ = std::move(rows);
    senseamp_ = std::move(latched);
    senseamp_enabled_ = true;
  }

  /// WRITE into the row buffer; every open row follows the bitlines.
  void drive_open_rows(std::span<const std::uint8_t> bits) {
    if (is_closed()) throw Error(ErrorCode::WriteWhileClosed, "no row is open");
    if (bits.size() != geometry_.n_bitlines)
      throw Error(ErrorCode::InvalidArgument, "write data width mismatch");
    senseamp_.assign(bits.begin(), bits.end());
    for (RowAddress r : open_rows_) fill_row(r, bits);
  }

  void close() {
    open_rows_.clear();
    senseamp_enabled_ = false;
  }

  const std::map<std::uint32_t, Row>& materialized_rows() const { return rows_; }

 private:
  Geometry geometry_;
  BankProfile profile_;
  double vdd_;
  Row default_row_;
  std::vector<Polarity> polarity_;
  std::map<std::uint32_t, Row> rows_;
  std::vector<RowAddress> open_rows_;
  Bits senseamp_;
  bool senseamp_enabled_ = false;
};

inline void init_rows(BankState& bank, std::span<const RowAddress> rows, const DataPattern& pattern) {
  if (!bank.is_closed()) throw Error(ErrorCode::ProtocolViolation, "init_rows needs a closed bank");
  for (RowAddress r : rows) bank.check_row(r);
  for (RowAddress r : rows) bank.fill_row(r, pattern_bits(pattern, r, bank.n_bitlines()));
}

/// Nominal ACT/READ/PRE of one row. Unresolved charge is either settled by the
/// sense-amplifier bias or reported, depending on the bank profile.
inline Bits read_row(const BankState& bank, RowAddress r) {
  if (!bank.is_closed()) throw Error(ErrorCode::ProtocolViolation, "read_row needs a closed bank");
  const Row& row = bank.row(r);
  const std::uint8_t bias = bias_bit(bank.polarity(r));
  Bits out(row.size());
  for (std::size_t b = 0; b < row.size(); ++b) {
    const CellLevel& c = row[b];
    if (c.resolved()) {
      out[b] = c.kind == CellLevel::Kind::One;
      continue;
    }
    if (!bank.profile().biased_senseamps)
      throw Error(ErrorCode::UnresolvedCell, "row " + std::to_string(r.value) + " bitline " +
                                                 std::to_string(b) + " holds unresolved charge");
    const double dev = c.volts(bank.vdd()) - bank.vdd() / 2.0;
    out[b] = dev > 0.0 ? 1 : (dev < 0.0 ? 0 : bias);
  }
  return out;
}

namespace detail {
struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ull;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ull;
    }
  }
  template <class T>
  void value(const T& v) {
    bytes(&v, sizeof(v));
  }
};
}  // namespace detail

inline std::uint64_t fnv1a(std::string_view s) {
  detail::Fnv1a f;
  f.bytes(s.data(), s.size());
  return f.h;
}

/// Content digest. Rows equal to the power-on content hash like untouched rows.
inline std::uint64_t snapshot(const BankState& bank) {
  detail::Fnv1a f;
  f.value(bank.n_bitlines());
  const Row zero_row(bank.n_bitlines(), CellLevel::zero());
  for (const auto& [index, row] : bank.materialized_rows()) {
    if (row == zero_row) continue;
    f.value(index);
    for (const CellLevel& c : row) {
      f.value(static_cast<std::uint8_t>(c.kind));
      if (c.kind == CellLevel::Kind::Analog) f.value(c.analog_volts);
    }
  }
  return f.h;
}

// Bank dump: little-endian header
//   "MRASBANK" | u32 version | u32 flags (bit0 = extended) | u32 n_subarrays |
//   u32 subarray_size | u32 n_bitlines | u32 row_count
// then per materialised row, ascending: u32 row | ceil(B/8) bytes of bits
// (LSB first; unresolved cells stored as 0) | extended only: ceil(B/4) bytes
// of 2-bit level codes (0 zero, 1 one, 2 neutral, 3 analog).
inline constexpr char kDumpMagic[8] = {'M', 'R', 'A', 'S', 'B', 'A', 'N', 'K'};
inline constexpr std::uint32_t kDumpVersion = 1;

namespace detail {
inline void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::IoError, "truncated bank dump");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace detail

inline void dump_bank(std::ostream& os, const BankState& bank, bool extended) {
  const auto& g = bank.geometry();
  os.write(kDumpMagic, sizeof(kDumpMagic));
  detail::put_u32(os, kDumpVersion);
  detail::put_u32(os, extended ? 1u : 0u);
  detail::put_u32(os, g.n_subarrays());
  detail::put_u32(os, g.subarray_size());
  detail::put_u32(os, g.n_bitlines);
  detail::put_u32(os, static_cast<std::uint32_t>(bank.materialized_rows().size()));
  const std::size_t bit_bytes = (g.n_bitlines + 7) / 8;
  const std::size_t code_bytes = (g.n_bitlines + 3) / 4;
  std::vector<char> buf;
  for (const auto& [index, row] : bank.materialized_rows()) {
    detail::put_u32(os, index);
    buf.assign(bit_bytes, 0);
    for (std::size_t b = 0; b < row.size(); ++b)
      if (row[b].kind == CellLevel::Kind::One) buf[b / 8] |= static_cast<char>(1u << (b % 8));
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!extended) continue;
    buf.assign(code_bytes, 0);
    for (std::size_t b = 0; b < row.size(); ++b)
      buf[b / 4] |= static_cast<char>(static_cast<unsigned>(row[b].kind) << (2 * (b % 4)));
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing bank dump");
}

struct BankDump {
  std::uint32_t n_subarrays = 0;
  std::uint32_t subarray_size = 0;
  std::uint32_t n_bitlines = 0;
  bool extended = false;
  std::map<std::uint32_t, Row> rows;  // analog voltages are not preserved
};

inline BankDump load_bank_dump(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kDumpMagic, 8) != 0)
    throw Error(ErrorCode::IoError, "not a bank dump");
  if (detail::get_u32(is) != kDumpVersion) throw Error(ErrorCode::IoError, "unsupported dump version");
  BankDump d;
  d.extended = detail::get_u32(is) & 1u;
  d.n_subarrays = detail::get_u32(is);
  d.subarray_size = detail::get_u32(is);
  d.n_bitlines = detail::get_u32(is);
  const std::uint32_t count = detail::get_u32(is);
  const std::size_t bit_bytes = (d.n_bitlines + 7) / 8;
  const std::size_t code_bytes = (d.n_bitlines + 3) / 4;
  std::vector<unsigned char> bits(bit_bytes), codes(code_bytes);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t index = detail::get_u32(is);
    if (!is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bit_bytes)))
      throw Error(ErrorCode::IoError, "truncated bank dump");
    Row row(d.n_bitlines);
    for (std::size_t b = 0; b < d.n_bitlines; ++b)
      row[b] = CellLevel::from_bit((bits[b / 8] >> (b % 8)) & 1u);
    if (d.extended) {
      if (!is.read(reinterpret_cast<char*>(codes.data()), static_cast<std::streamsize>(code_bytes)))
        throw Error(ErrorCode::IoError, "truncated bank dump");
      for (std::size_t b = 0; b < d.n_bitlines; ++b)
        row[b].kind = static_cast<CellLevel::Kind>((codes[b / 4] >> (2 * (b % 4))) & 3u);
    }
    d.rows.emplace(index, std::move(row));
  }
  return d;
}

}  // namespace mrasim
