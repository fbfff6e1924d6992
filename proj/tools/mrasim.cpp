// Command-line front end. Exit status: 0 ok, 2 invariant violation, 3 bad
// input or configuration.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mrasim/mrasim.hpp"

namespace {

using namespace mrasim;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool full = false;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

ExperimentConfig make_config(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (g.full) cfg.make_full();
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

PatternKind parse_pattern(const std::string& s) {
  if (s == "random") return PatternKind::Random;
  if (s == "ones_zeros" || s == "ones-zeros") return PatternKind::OnesZeros;
  throw Error(ErrorCode::InvalidArgument, "pattern must be 'random' or 'ones_zeros'");
}

DataPattern parse_init(const std::string& s) {
  if (s == "ones") return DataPattern::ones();
  if (s == "zeros") return DataPattern::zeros();
  if (s.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    const std::string v = s.substr(7);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
    if (ec == std::errc{} && p == v.data() + v.size() && !v.empty()) return DataPattern::random(seed);
  }
  throw Error(ErrorCode::InvalidArgument, "init must be ones, zeros or random:SEED");
}

/// Rows the trace can touch: every ACT target and the group of each
/// consecutive ACT pair inside one subarray.
std::vector<RowAddress> trace_rows(const Trace& t, const Geometry& g) {
  std::vector<RowAddress> rows;
  std::optional<RowAddress> prev;
  for (const auto& c : t) {
    if (c.kind != Command::Kind::Act) continue;
    if (c.row.value >= g.n_rows()) continue;  // reported by the engine
    rows.push_back(c.row);
    if (prev && g.subarray_of(*prev) == g.subarray_of(c.row))
      for (RowAddress r : nrg(*prev, c.row, g.decoder).rows) rows.push_back(r);
    prev = c.row;
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mrasim: simulator of multi-row activation in commodity DRAM"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "INI configuration file");
  app.add_option("--seed", g.seed, "override the configured seed");
  app.add_option("--out", g.out, "write the report here instead of stdout");
  app.add_flag("--full", g.full, "full-scale trial and subarray counts");

  std::uint32_t r1 = 0, r2 = 0;
  auto* decode = app.add_subcommand("decode", "row group opened by an ACT-PRE-ACT pair");
  decode->add_option("--r1", r1, "first ACT row")->required();
  decode->add_option("--r2", r2, "second ACT row")->required();

  std::string trace_path, init_spec, dump_path;
  bool extended = false;
  std::optional<std::uint32_t> bitlines;
  auto* exec = app.add_subcommand("exec", "replay a command trace");
  exec->add_option("--trace", trace_path, "trace file")->required();
  exec->add_option("--init", init_spec, "ones | zeros | random:SEED for every row the trace touches");
  exec->add_option("--dump", dump_path, "binary bank dump");
  exec->add_flag("--extended", extended, "include per-cell level codes in the dump");
  exec->add_option("--bitlines", bitlines, "row width (default from config)");

  auto* census = app.add_subcommand("census", "NRG size histogram over all anchor pairs");

  std::string regime = "mrc";
  std::optional<std::uint32_t> vr1, vr2;
  auto* verify = app.add_subcommand("verify", "initialise, APA, WRITE, read back");
  verify->add_option("--regime", regime, "nominal | mrc | charge_share");
  verify->add_option("--r1", vr1, "first ACT row (default: random NRGs)");
  verify->add_option("--r2", vr2, "second ACT row");

  unsigned m = 3, n = 32;
  std::string pattern = "random";
  std::optional<std::uint32_t> trials;
  auto* maj = app.add_subcommand("maj", "success rate of MAJ-m on random NRGs");
  maj->add_option("--m", m, "inputs");
  maj->add_option("--n", n, "rows activated");
  maj->add_option("--pattern", pattern, "random | ones_zeros");
  maj->add_option("--trials", trials, "random-pattern trials");

  auto* characterize = app.add_subcommand("characterize", "success rates over m, n and data pattern");
  characterize->add_option("--trials", trials, "random-pattern trials");
  auto* spatial = app.add_subcommand("spatial", "mean success rate per subarray");

  std::string kernel = "add", scenario = "realexp";
  unsigned arity = 3;
  std::optional<unsigned> rows;
  std::optional<std::uint32_t> elements;
  auto* compute = app.add_subcommand("compute", "run a bit-serial kernel and model its latency");
  compute->add_option("--kernel", kernel, "and | or | xor | add | sub | mul | div");
  compute->add_option("--arity", arity, "largest MAJ used (3, 5, 7, 9)");
  compute->add_option("--n", rows, "rows per MAJ (default: best throughput)");
  compute->add_option("--scenario", scenario, "realexp | realinit | realsr | ideal | equal");
  compute->add_option("--elements", elements, "vector length");

  auto* sensitivity = app.add_subcommand("sensitivity", "speedup grid over scenarios, n and arity");

  std::uint32_t max_n = 32;
  std::string baseline = "rowclone", plan_trace;
  auto* destruct = app.add_subcommand("destruct", "content-destruction plan and speedup");
  destruct->add_option("--max-n", max_n, "largest row group used");
  destruct->add_option("--baseline", baseline, "rowclone | frac");
  destruct->add_option("--trace-out", plan_trace, "write the plan as a trace file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    ExperimentConfig cfg = make_config(g);
    if (trials) cfg.trials = *trials;
    if (elements) cfg.elements = *elements;
    cfg.validate();
    int status = 0;

    if (decode->parsed()) {
      const auto d1 = decode_address(RowAddress{r1}, cfg.geometry.decoder);
      const auto d2 = decode_address(RowAddress{r2}, cfg.geometry.decoder);
      std::cerr << r1 << ": " << d1.to_string() << '\n' << r2 << ": " << d2.to_string() << '\n';
      Output(g.out).os() << decode_row(RowAddress{r1}, RowAddress{r2}, cfg.geometry.decoder) << '\n';
    } else if (exec->parsed()) {
      std::ifstream tf(trace_path);
      if (!tf) throw Error(ErrorCode::IoError, "cannot open trace '" + trace_path + "'");
      const Trace trace = parse_trace(tf);
      Geometry geo = cfg.geometry;
      if (bitlines) geo.n_bitlines = *bitlines;
      BankState bank(geo, cfg.profile, cfg.polarity, cfg.analog.vdd);
      if (!init_spec.empty()) init_rows(bank, trace_rows(trace, geo), parse_init(init_spec));
      std::optional<VariationSample> vs;
      if (cfg.analog.variation_sigma > 0) vs.emplace(cfg.analog, cfg.seed, geo.n_bitlines);
      const auto res = execute(bank, trace, cfg.exec_context(vs ? &*vs : nullptr));
      Output out(g.out);
      auto& os = out.os();
      os << "# schema=mrasim.events/" << kSchemaVersion << " config_digest=" << config_digest(cfg)
         << " seed=" << cfg.seed << '\n';
      write_events_csv(os, res.events);
      for (const auto& v : check_power(trace, cfg.timing))
        std::cerr << "tFAW: " << v.acts << " ACTs in window starting at " << format_time(v.window_start) << " ns\n";
      if (!dump_path.empty()) {
        std::ofstream df(dump_path, std::ios::binary);
        if (!df) throw Error(ErrorCode::IoError, "cannot write '" + dump_path + "'");
        dump_bank(df, bank, extended);
      }
    } else if (census->parsed()) {
      write_csv(Output(g.out).os(), census_report(cfg), cfg);
    } else if (verify->parsed()) {
      if (vr1.has_value() != vr2.has_value()) throw Error(ErrorCode::InvalidArgument, "--r1 and --r2 go together");
      std::optional<std::pair<RowAddress, RowAddress>> pair;
      if (vr1) pair = std::pair{RowAddress{*vr1}, RowAddress{*vr2}};
      std::size_t failures = 0;
      write_csv(Output(g.out).os(), verify_report(cfg, parse_verify_regime(regime), pair, &failures), cfg);
      if (failures) {
        std::cerr << failures << " group(s) failed verification\n";
        status = 2;
      }
    } else if (maj->parsed()) {
      write_csv(Output(g.out).os(), maj_report(cfg, m, n, parse_pattern(pattern)), cfg);
    } else if (characterize->parsed()) {
      write_csv(Output(g.out).os(), characterize_report(cfg), cfg);
    } else if (spatial->parsed()) {
      write_csv(Output(g.out).os(), spatial_report(cfg), cfg);
    } else if (compute->parsed()) {
      const auto r = compute_report(cfg, parse_kernel(kernel), arity, rows, parse_scenario(scenario));
      Output(g.out).os() << r.report.dump(2) << '\n';
      if (!r.matches_oracle) {
        std::cerr << "kernel result disagrees with the host reference\n";
        status = 2;
      }
    } else if (sensitivity->parsed()) {
      write_csv(Output(g.out).os(), sensitivity_report(cfg), cfg);
    } else if (destruct->parsed()) {
      const auto r = destruct_report(cfg, max_n, baseline);
      Output(g.out).os() << r.report.dump(2) << '\n';
      if (!plan_trace.empty()) {
        std::ofstream tf(plan_trace);
        if (!tf) throw Error(ErrorCode::IoError, "cannot write '" + plan_trace + "'");
        write_trace(tf, r.plan.trace);
      }
    }
    return status;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
