#pragma once

// Experiment configuration: an INI file with one section per module. Every
// key is optional; unknown keys are rejected so typos surface as errors.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrasim/analog_model.hpp"
#include "mrasim/bitserial.hpp"
#include "mrasim/command_engine.hpp"
#include "mrasim/dram_state.hpp"
#include "mrasim/error.hpp"

namespace mrasim {

struct ExperimentConfig {
  Geometry geometry{};
  BankProfile profile{};
  PolarityRule polarity = PolarityRule::Alternating;
  AnalogParams analog = [] {
    AnalogParams a;
    a.variation_sigma = 0.2;
    return a;
  }();
  TimingParams timing{};
  double first_row_weight = 1.0;
  SuccessTable success = SuccessTable::published();
  std::uint32_t elements = 65536;  // compute kernel width
  std::string destruct_pattern = "a5";

  std::uint64_t seed = 1;
  std::uint32_t trials = 1000;      // random-pattern trials
  std::uint32_t nrgs = 100;         // NRGs per (subarray, n)
  std::uint32_t subarrays = 1;      // subarrays characterized
  std::uint32_t mc_bitlines = 128;  // bitlines simulated per Monte Carlo run
  std::uint32_t spatial_subarrays = 16;
  std::uint32_t spatial_nrgs = 10;
  std::string spatial_profile = "flat";  // flat | m
  double spatial_amplitude = 0.5;

  /// Full-scale settings.
  void make_full() {
    trials = 10000;
    subarrays = 3;
    mc_bitlines = geometry.n_bitlines;
    spatial_subarrays = geometry.n_subarrays();
    spatial_nrgs = 100;
  }

  ExecContext exec_context(VariationSample* vs = nullptr) const {
    ExecContext c;
    c.timing = timing;
    c.analog = analog;
    c.variation = vs;
    c.first_row_weight = first_row_weight;
    return c;
  }

  Geometry mc_geometry() const {
    Geometry g = geometry;
    g.n_bitlines = mc_bitlines;
    return g;
  }

  void validate() const {
    geometry.decoder.validate();
    analog.validate();
    timing.validate();
    if (geometry.n_bitlines == 0 || mc_bitlines == 0 || elements == 0)
      throw Error(ErrorCode::ConfigError, "bitline and element counts must be positive");
    if (trials == 0 || nrgs == 0 || subarrays == 0 || spatial_subarrays == 0 || spatial_nrgs == 0)
      throw Error(ErrorCode::ConfigError, "trial, NRG and subarray counts must be positive");
    if (subarrays > geometry.n_subarrays() || spatial_subarrays > geometry.n_subarrays())
      throw Error(ErrorCode::ConfigError, "more subarrays requested than the bank has");
    if (spatial_profile != "flat" && spatial_profile != "m")
      throw Error(ErrorCode::ConfigError, "spatial_profile must be 'flat' or 'm'");
    if (!(spatial_amplitude >= 0)) throw Error(ErrorCode::ConfigError, "spatial_amplitude must be non-negative");
    if (!(first_row_weight > 0)) throw Error(ErrorCode::ConfigError, "first_row_weight must be positive");
    for (const auto& [k, v] : success.rates)
      if (!(v >= 0 && v <= 1)) throw Error(ErrorCode::ConfigError, "success rates must lie in [0, 1]");
    try {
      parse_hex_bits(destruct_pattern);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("destruct pattern: ") + e.what());
    }
  }
};

inline std::string_view to_string(PolarityRule r) {
  switch (r) {
    case PolarityRule::Alternating: return "alternating";
    case PolarityRule::AllTrue: return "true";
    case PolarityRule::AllAnti: return "anti";
  }
  return "?";
}

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorCode::ConfigError, "bad value '" + s + "' for " + key);
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(ErrorCode::ConfigError, "bad boolean '" + s + "' for " + key);
}

inline std::string success_key(unsigned m, unsigned n) {
  return "success_m" + std::to_string(m) + "_n" + std::to_string(n);
}

}  // namespace detail

/// Canonical text form; also the input to the config digest.
inline std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return format_time(v); };
  o << "[row-decoder]\ngroup_widths = ";
  for (std::size_t i = 0; i < c.geometry.decoder.group_widths.size(); ++i)
    o << (i ? "," : "") << c.geometry.decoder.group_widths[i];
  o << "\nsubarray_bits = " << c.geometry.decoder.subarray_bits << "\n\n";
  o << "[dram-state]\nn_bitlines = " << c.geometry.n_bitlines
    << "\nbiased_senseamps = " << (c.profile.biased_senseamps ? "true" : "false")
    << "\npolarity = " << to_string(c.polarity) << "\n\n";
  const auto& a = c.analog;
  o << "[analog-model]\nvdd = " << num(a.vdd) << "\nc_cell_nominal = " << num(a.c_cell_nominal)
    << "\ncb_ratio = " << num(a.cb_ratio) << "\nvariation_sigma = " << num(a.variation_sigma)
    << "\nsense_offset_sigma = " << num(a.sense_offset_sigma) << "\nsense_threshold = " << num(a.sense_threshold)
    << "\nbias_margin = " << num(a.bias_margin) << "\ntruncate_sigmas = " << num(a.truncate_sigmas)
    << "\ncap_floor = " << num(a.cap_floor) << "\nstatic_variation = " << (a.static_variation ? "true" : "false")
    << "\nspatial_profile = " << c.spatial_profile << "\nspatial_amplitude = " << num(c.spatial_amplitude)
    << "\n\n";
  const auto& t = c.timing;
  o << "[command-engine]\nt_ras = " << num(t.t_ras) << "\nt_rp = " << num(t.t_rp)
    << "\nt_violation = " << num(t.t_violation) << "\nt_faw = " << num(t.t_faw)
    << "\nmax_acts_in_faw = " << t.max_acts_in_faw << "\nt_rcd = " << num(t.t_rcd) << "\nt_wr = " << num(t.t_wr)
    << "\nt_rtp = " << num(t.t_rtp) << "\napa_gap = " << num(t.apa_gap) << "\nrestore_tail = " << num(t.restore_tail)
    << "\n\n";
  o << "[pum-primitives]\nfirst_row_weight = " << num(c.first_row_weight) << "\n\n";
  o << "[bitserial-compute]\nelements = " << c.elements << "\n";
  for (const auto& [k, v] : c.success.rates) o << detail::success_key(k.first, k.second) << " = " << num(v) << "\n";
  o << "\n[destruct]\npattern = " << c.destruct_pattern << "\n\n";
  o << "[cli-experiments]\nseed = " << c.seed << "\ntrials = " << c.trials << "\nnrgs = " << c.nrgs
    << "\nsubarrays = " << c.subarrays << "\nmc_bitlines = " << c.mc_bitlines
    << "\nspatial_subarrays = " << c.spatial_subarrays << "\nspatial_nrgs = " << c.spatial_nrgs << "\n";
  return o.str();
}

inline std::string config_digest(const ExperimentConfig& c) {
  char buf[17];
  const std::uint64_t h = fnv1a(to_ini(c));
  static constexpr char hex[] = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[i] = hex[(h >> (60 - 4 * i)) & 15];
  buf[16] = 0;
  return buf;
}

/// Applies the keys of an INI stream on top of `base`.
inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig c = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error(ErrorCode::ConfigError, "key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string v = node.data();
      const std::string where = section + "." + key;
      auto u32 = [&] { return detail::parse_number<std::uint32_t>(where, v); };
      auto dbl = [&] { return detail::parse_number<double>(where, v); };
      bool known = true;
      if (section == "row-decoder") {
        if (key == "group_widths") {
          std::vector<unsigned> w;
          std::stringstream ss(v);
          for (std::string item; std::getline(ss, item, ',');) {
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            w.push_back(detail::parse_number<unsigned>(where, item));
          }
          c.geometry.decoder.group_widths = w;
        } else if (key == "subarray_bits") {
          c.geometry.decoder.subarray_bits = u32();
        } else {
          known = false;
        }
      } else if (section == "dram-state") {
        if (key == "n_bitlines") c.geometry.n_bitlines = u32();
        else if (key == "biased_senseamps") c.profile.biased_senseamps = detail::parse_bool(where, v);
        else if (key == "polarity") {
          if (v == "alternating") c.polarity = PolarityRule::Alternating;
          else if (v == "true") c.polarity = PolarityRule::AllTrue;
          else if (v == "anti") c.polarity = PolarityRule::AllAnti;
          else throw Error(ErrorCode::ConfigError, "bad polarity '" + v + "'");
        } else known = false;
      } else if (section == "analog-model") {
        auto& a = c.analog;
        if (key == "vdd") a.vdd = dbl();
        else if (key == "c_cell_nominal") a.c_cell_nominal = dbl();
        else if (key == "cb_ratio") a.cb_ratio = dbl();
        else if (key == "variation_sigma") a.variation_sigma = dbl();
        else if (key == "sense_offset_sigma") a.sense_offset_sigma = dbl();
        else if (key == "sense_threshold") a.sense_threshold = dbl();
        else if (key == "bias_margin") a.bias_margin = dbl();
        else if (key == "truncate_sigmas") a.truncate_sigmas = dbl();
        else if (key == "cap_floor") a.cap_floor = dbl();
        else if (key == "static_variation") a.static_variation = detail::parse_bool(where, v);
        else if (key == "spatial_profile") c.spatial_profile = v;
        else if (key == "spatial_amplitude") c.spatial_amplitude = dbl();
        else known = false;
      } else if (section == "command-engine") {
        auto& t = c.timing;
        if (key == "t_ras") t.t_ras = dbl();
        else if (key == "t_rp") t.t_rp = dbl();
        else if (key == "t_violation") t.t_violation = dbl();
        else if (key == "t_faw") t.t_faw = dbl();
        else if (key == "max_acts_in_faw") t.max_acts_in_faw = u32();
        else if (key == "t_rcd") t.t_rcd = dbl();
        else if (key == "t_wr") t.t_wr = dbl();
        else if (key == "t_rtp") t.t_rtp = dbl();
        else if (key == "apa_gap") t.apa_gap = dbl();
        else if (key == "restore_tail") t.restore_tail = dbl();
        else known = false;
      } else if (section == "pum-primitives") {
        if (key == "first_row_weight") c.first_row_weight = dbl();
        else known = false;
      } else if (section == "bitserial-compute") {
        unsigned m = 0, n = 0;
        char tail = 0;
        if (key == "elements") c.elements = u32();
        else if (std::sscanf(key.c_str(), "success_m%u_n%u%c", &m, &n, &tail) == 2) c.success.rates[{m, n}] = dbl();
        else known = false;
      } else if (section == "destruct") {
        if (key == "pattern") c.destruct_pattern = v;
        else known = false;
      } else if (section == "cli-experiments") {
        if (key == "seed") c.seed = detail::parse_number<std::uint64_t>(where, v);
        else if (key == "trials") c.trials = u32();
        else if (key == "nrgs") c.nrgs = u32();
        else if (key == "subarrays") c.subarrays = u32();
        else if (key == "mc_bitlines") c.mc_bitlines = u32();
        else if (key == "spatial_subarrays") c.spatial_subarrays = u32();
        else if (key == "spatial_nrgs") c.spatial_nrgs = u32();
        else known = false;
      } else {
        throw Error(ErrorCode::ConfigError, "unknown section [" + section + "]");
      }
      if (!known) throw Error(ErrorCode::ConfigError, "unknown key " + where);
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace mrasim
