#pragma once

// Seeded experiment drivers and their report formats. Reports carry a schema
// tag and the config digest; nothing time- or host-dependent is written, so a
// rerun with the same config reproduces them byte for byte.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrasim/analog_model.hpp"
#include "mrasim/bitserial.hpp"
#include "mrasim/command_engine.hpp"
#include "mrasim/config.hpp"
#include "mrasim/destruct.hpp"
#include "mrasim/dram_state.hpp"
#include "mrasim/primitives.hpp"
#include "mrasim/row_decoder.hpp"

namespace mrasim {

inline constexpr int kSchemaVersion = 1;

/// Exit status for an error: 2 when the simulated system rejected or broke
/// an invariant, 3 when the input or configuration was unusable.
inline int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidArity:
    case ErrorCode::ArityUnavailable:
    case ErrorCode::MalformedTrace:
    case ErrorCode::IoError: return 3;
    default: return 2;
  }
}

struct CsvReport {
  std::string schema;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }
};

inline void write_csv(std::ostream& os, const CsvReport& r, const ExperimentConfig& cfg) {
  os << "# schema=mrasim." << r.schema << '/' << kSchemaVersion << " config_digest=" << config_digest(cfg)
     << " seed=" << cfg.seed << '\n';
  auto line = [&](const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << '\n';
  };
  line(r.header);
  for (const auto& row : r.rows) line(row);
}

inline nlohmann::ordered_json json_envelope(std::string_view schema, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema"] = "mrasim." + std::string(schema) + "/" + std::to_string(kSchemaVersion);
  j["config_digest"] = config_digest(cfg);
  j["seed"] = cfg.seed;
  return j;
}

inline std::string num(double v) { return format_time(v); }

inline std::string join_rows(const std::vector<RowAddress>& rows) {
  std::string s;
  for (std::size_t i = 0; i < rows.size(); ++i) s += (i ? ";" : "") + std::to_string(rows[i].value);
  return s;
}

/// Per-cell RNG seed: a hash of the config seed and the cell coordinates.
inline std::uint64_t cell_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  detail::Fnv1a h;
  h.value(seed);
  for (auto id : ids) h.value(id);
  return h.h;
}

// ---- decoder ----

inline std::string decode_row(RowAddress r1, RowAddress r2, const DecoderLayout& layout) {
  const RowGroup g = nrg(r1, r2, layout);
  return std::to_string(r1.value) + "," + std::to_string(r2.value) + "," + std::to_string(g.n()) + "," +
         join_rows(g.rows);
}

inline CsvReport census_report(const ExperimentConfig& cfg) {
  CsvReport r{"census", {"n", "pairs", "fraction"}, {}};
  const auto c = nrg_census(cfg.geometry.decoder);
  for (const auto& [n, pairs] : c.pairs) r.add({std::to_string(n), std::to_string(pairs), num(c.fraction(n))});
  return r;
}

// ---- verification (initialise, APA, WRITE, read back) ----

enum class VerifyRegime : std::uint8_t { Nominal, Mrc, ChargeShare };

inline std::string_view to_string(VerifyRegime v) {
  switch (v) {
    case VerifyRegime::Nominal: return "nominal";
    case VerifyRegime::Mrc: return "mrc";
    case VerifyRegime::ChargeShare: return "charge_share";
  }
  return "?";
}

inline VerifyRegime parse_verify_regime(std::string_view s) {
  for (auto v : {VerifyRegime::Nominal, VerifyRegime::Mrc, VerifyRegime::ChargeShare})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::InvalidArgument, "unknown regime '" + std::string(s) + "'");
}

struct VerifyOutcome {
  RowGroup group;
  std::vector<RowAddress> written;
  bool pass = false;
};

inline Trace verify_trace(RowAddress r1, RowAddress r2, Bits data, VerifyRegime regime, const TimingParams& t) {
  double pre = t.t_ras, a2 = t.t_ras + t.t_rp;
  if (regime == VerifyRegime::Mrc) a2 = t.t_ras + t.apa_gap;
  if (regime == VerifyRegime::ChargeShare) {
    pre = t.apa_gap;
    a2 = 2 * t.apa_gap;
  }
  return {Command::act(0, r1), Command::pre(pre), Command::act(a2, r2), Command::write(a2 + t.t_rcd, std::move(data)),
          Command::pre(a2 + std::max(t.restore_tail, t.t_rcd + t.t_wr))};
}

/// Initialises the group with one pattern, overwrites through the APA and
/// reads every row back. Passes when exactly the expected rows changed.
inline VerifyOutcome verify_pair(const ExperimentConfig& cfg, RowAddress r1, RowAddress r2, VerifyRegime regime,
                                 std::uint64_t seed) {
  BankState bank(cfg.mc_geometry(), cfg.profile, cfg.polarity, cfg.analog.vdd);
  VerifyOutcome out{nrg(r1, r2, cfg.geometry.decoder), {}, false};
  init_rows(bank, out.group.rows, DataPattern::random(seed));
  const Bits data = random_row_bits(seed ^ 0x5eedull, RowAddress{0}, bank.n_bitlines());
  execute(bank, verify_trace(r1, r2, data, regime, cfg.timing), cfg.exec_context());
  for (RowAddress r : out.group.rows)
    if (read_row(bank, r) == data) out.written.push_back(r);
  const std::vector<RowAddress> expect = regime == VerifyRegime::Nominal ? std::vector{r2} : out.group.rows;
  out.pass = out.written == expect;
  return out;
}

inline CsvReport verify_report(const ExperimentConfig& cfg, VerifyRegime regime,
                               std::optional<std::pair<RowAddress, RowAddress>> pair, std::size_t* failures) {
  CsvReport r{"verify", {"nrg_id", "r1", "r2", "n", "regime", "rows_written", "pass"}, {}};
  std::size_t bad = 0;
  auto emit = [&](std::size_t id, RowAddress a, RowAddress b, std::uint64_t seed) {
    const auto o = verify_pair(cfg, a, b, regime, seed);
    bad += !o.pass;
    r.add({std::to_string(id), std::to_string(a.value), std::to_string(b.value), std::to_string(o.group.n()),
           std::string(to_string(regime)), std::to_string(o.written.size()), o.pass ? "1" : "0"});
  };
  if (pair) {
    emit(0, pair->first, pair->second, cell_seed(cfg.seed, {0}));
  } else {
    std::size_t id = 0;
    for (std::uint32_t s = 0; s < cfg.subarrays; ++s)
      for (std::uint32_t n = 2; n <= 32; n *= 2) {
        std::mt19937_64 rng(cell_seed(cfg.seed, {0x7e41, s, n}));
        for (std::uint32_t k = 0; k < cfg.nrgs; ++k, ++id) {
          auto [a, b] = random_anchor_pair(rng, s, n, cfg.geometry.decoder);
          emit(id, a, b, cell_seed(cfg.seed, {id}));
        }
      }
  }
  if (failures) *failures = bad;
  return r;
}

// ---- majority characterization ----

/// Per-subarray sigma multiplier. "m" dips at the quarter points so success
/// rates peak there and sag at the edges and the middle.
inline double spatial_scale(const ExperimentConfig& cfg, std::uint32_t subarray) {
  if (cfg.spatial_profile == "flat" || cfg.geometry.n_subarrays() < 2) return 1.0;
  const double x = static_cast<double>(subarray) / (cfg.geometry.n_subarrays() - 1);
  return 1.0 + cfg.spatial_amplitude * (1.0 - std::abs(std::sin(2.0 * 3.14159265358979323846 * x)));
}

struct SuccessRow {
  std::uint32_t subarray = 0;
  std::uint32_t nrg_id = 0;
  RowAddress first, second;
  unsigned m = 3, n = 4;
  PatternKind pattern = PatternKind::Random;
  std::uint32_t trials = 0;
  double success_rate = 0;
  std::uint32_t unstable = 0;
};

/// `count` random NRGs of size n in `subarray`, characterized for MAJ-m.
inline std::vector<SuccessRow> characterize_cells(const ExperimentConfig& cfg, std::uint32_t subarray, unsigned m,
                                                  unsigned n, PatternKind p, std::uint32_t count) {
  const Geometry g = cfg.mc_geometry();
  BankState bank(g, cfg.profile, cfg.polarity, cfg.analog.vdd);
  VariationSample vs(cfg.analog, cell_seed(cfg.seed, {0xa9a1, subarray}), g.n_bitlines, spatial_scale(cfg, subarray));
  const auto ctx = cfg.exec_context(&vs);
  std::mt19937_64 rng(cell_seed(cfg.seed, {0x6e67, subarray, n}));
  std::vector<SuccessRow> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    auto [a, b] = random_anchor_pair(rng, subarray, n, g.decoder);
    const RowGroup grp = nrg(a, b, g.decoder);
    const auto r = characterize_fast(bank, grp, m, p, cfg.trials, cell_seed(cfg.seed, {0xda7a, subarray, n, k, m}), ctx);
    const auto unstable = static_cast<std::uint32_t>(g.n_bitlines - std::count(r.stable.begin(), r.stable.end(), 1));
    out.push_back({subarray, k, a, b, m, n, p, r.trials, r.success_rate, unstable});
  }
  return out;
}

inline CsvReport maj_report(const ExperimentConfig& cfg, unsigned m, unsigned n, PatternKind p) {
  replication_layout(m, n);
  CsvReport r{"maj", {"nrg_id", "m", "n", "pattern", "success_rate"}, {}};
  for (const auto& row : characterize_cells(cfg, 0, m, n, p, cfg.nrgs))
    r.add({std::to_string(row.nrg_id), std::to_string(m), std::to_string(n), std::string(to_string(p)),
           num(row.success_rate)});
  return r;
}

inline const std::vector<unsigned>& characterized_arities() {
  static const std::vector<unsigned> m{3, 5, 7, 9};
  return m;
}

inline CsvReport characterize_report(const ExperimentConfig& cfg) {
  CsvReport r{"success_rate",
              {"module_profile", "subarray", "nrg_id", "m", "n", "pattern", "trials", "success_rate",
               "unstable_bitlines"},
              {}};
  const std::string profile = cfg.profile.biased_senseamps ? "biased" : "strict";
  for (std::uint32_t s = 0; s < cfg.subarrays; ++s)
    for (unsigned n = 4; n <= 32; n *= 2)
      for (unsigned m : characterized_arities()) {
        if (min_rows_for(m) > n) continue;
        for (auto p : {PatternKind::OnesZeros, PatternKind::Random})
          for (const auto& row : characterize_cells(cfg, s, m, n, p, cfg.nrgs))
            r.add({profile, std::to_string(s), std::to_string(row.nrg_id), std::to_string(m), std::to_string(n),
                   std::string(to_string(p)), std::to_string(row.trials), num(row.success_rate),
                   std::to_string(row.unstable)});
      }
  return r;
}

/// Mean MAJ3 success per sampled subarray and n (random data).
inline CsvReport spatial_report(const ExperimentConfig& cfg) {
  CsvReport r{"spatial", {"subarray", "n", "nrgs", "mean_success_rate"}, {}};
  const std::uint32_t S = cfg.geometry.n_subarrays();
  for (std::uint32_t i = 0; i < cfg.spatial_subarrays; ++i) {
    const std::uint32_t s =
        cfg.spatial_subarrays == 1 ? 0 : static_cast<std::uint32_t>(std::uint64_t{i} * (S - 1) / (cfg.spatial_subarrays - 1));
    for (unsigned n = 4; n <= 32; n *= 2) {
      double sum = 0;
      const auto rows = characterize_cells(cfg, s, 3, n, PatternKind::Random, cfg.spatial_nrgs);
      for (const auto& row : rows) sum += row.success_rate;
      r.add({std::to_string(s), std::to_string(n), std::to_string(rows.size()), num(sum / rows.size())});
    }
  }
  return r;
}

// ---- performance model ----

inline PerfScenario make_scenario(const ExperimentConfig& cfg, Scenario kind, std::optional<unsigned> n = {}) {
  PerfScenario s;
  s.kind = kind;
  s.success = cfg.success;
  s.latency = OpLatencies::from_timing(cfg.timing);
  s.n_rows = n;
  return s;
}

inline const std::vector<Kernel>& all_kernels() {
  static const std::vector<Kernel> k{Kernel::And, Kernel::Or, Kernel::Xor, Kernel::Add,
                                     Kernel::Sub, Kernel::Mul, Kernel::Div};
  return k;
}

inline CsvReport sensitivity_report(const ExperimentConfig& cfg) {
  CsvReport r{"sensitivity", {"scenario", "n", "max_arity", "kernel", "speedup"}, {}};
  for (auto sc : {Scenario::RealExp, Scenario::RealInit, Scenario::RealSR, Scenario::Ideal, Scenario::EqualLatency})
    for (unsigned n = 4; n <= 32; n *= 2)
      for (unsigned m : characterized_arities()) {
        if (min_rows_for(m) > n) continue;
        const auto s = make_scenario(cfg, sc, n);
        for (Kernel k : all_kernels())
          r.add({std::string(to_string(sc)), std::to_string(n), std::to_string(m), std::string(to_string(k)),
                 num(speedup(k, m, s))});
      }
  return r;
}

struct ComputeOutcome {
  nlohmann::ordered_json report;
  bool matches_oracle = false;
};

inline ComputeOutcome compute_report(const ExperimentConfig& cfg, Kernel k, unsigned arity, std::optional<unsigned> n,
                                     Scenario sc) {
  if (n) replication_layout(arity, *n);
  std::mt19937_64 rng(cell_seed(cfg.seed, {0xc0de, static_cast<std::uint64_t>(k)}));
  std::vector<std::uint32_t> a(cfg.elements), b(cfg.elements);
  for (auto& x : a) x = static_cast<std::uint32_t>(rng());
  for (auto& x : b) x = static_cast<std::uint32_t>(rng() >> (rng() % 32));
  ExactBackend be;
  BitSerialMachine mc(be, arity, a.size());
  const auto res = run_kernel(mc, k, BitColumnMatrix::load(a), BitColumnMatrix::load(b));
  const auto values = res.values();
  const auto s = make_scenario(cfg, sc, n);
  ComputeOutcome out;
  out.matches_oracle = values == kernel_oracle(k, a, b) && res.negation_consistent();
  detail::Fnv1a h;
  for (auto v : values) h.value(v);
  auto& j = out.report = json_envelope("compute", cfg);
  j["kernel"] = to_string(k);
  j["arity"] = arity;
  j["scenario"] = to_string(sc);
  j["elements"] = cfg.elements;
  std::ostringstream dig;
  dig << std::hex << h.h;
  j["result_digest"] = dig.str();
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (auto [m, c] : mc.counts().maj) counts["maj" + std::to_string(m)] = c;
  j["op_counts"] = counts;
  j["modeled_time_ns"] = model_time(mc.counts(), s);
  j["speedup_vs_fracdram"] = model_time(count_ops(k, 3), baseline_of(s)) / model_time(mc.counts(), s);
  j["oracle_match"] = out.matches_oracle;
  return out;
}

// ---- destruction ----

struct DestructOutcome {
  nlohmann::ordered_json report;
  DestructionPlan plan;
};

inline DestructOutcome destruct_report(const ExperimentConfig& cfg, std::uint32_t max_n, std::string_view baseline) {
  const Bits pattern = parse_hex_bits(cfg.destruct_pattern);
  DestructionPlan base;
  if (baseline == "rowclone") base = plan_rowclone(cfg.geometry, pattern, cfg.timing);
  else if (baseline == "frac") base = plan_frac(cfg.geometry, pattern, cfg.timing);
  else throw Error(ErrorCode::InvalidArgument, "baseline must be 'rowclone' or 'frac'");
  DestructOutcome out{json_envelope("destruct", cfg), plan_pulsar(cfg.geometry, max_n, pattern, cfg.timing)};
  const auto c = compare(out.plan, base);
  auto& j = out.report;
  j["plan"] = out.plan.name;
  j["steps"] = out.plan.step_count();
  j["modeled_time_ns"] = out.plan.modeled_time;
  j["baseline"] = base.name;
  j["baseline_steps"] = base.step_count();
  j["baseline_time_ns"] = base.modeled_time;
  j["speedup"] = c.speedup;
  j["faw_violations"] = check_power(out.plan.trace, cfg.timing).size();
  return out;
}

}  // namespace mrasim
