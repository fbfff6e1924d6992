#pragma once

// Lumped charge-sharing model. A bitline of capacitance C_b precharged to
// Vdd/2 is connected to k cells (C_i, V_i); the settled deviation from Vdd/2
// is the charge-weighted mean below. Process variation perturbs each C_i and
// adds an offset at the sense amplifier input.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "mrasim/dram_state.hpp"
#include "mrasim/error.hpp"

namespace mrasim {

struct AnalogParams {
  double vdd = 1.2;
  double c_cell_nominal = 1.0;
  double cb_ratio = 5.79;          // C_b / C_c
  double variation_sigma = 0.0;    // relative sigma of cell capacitance
  double sense_offset_sigma = 0.0375;  // volts of sense offset per unit variation_sigma
  double sense_threshold = 0.0;
  double bias_margin = 0.01;       // pull toward the bias bit on biased sense amplifiers
  double truncate_sigmas = 3.0;
  double cap_floor = 0.05;
  bool static_variation = true;    // capacitances fixed per cell; offsets redrawn per trial

  void validate() const {
    if (!(vdd > 0 && c_cell_nominal > 0 && cb_ratio > 0))
      throw Error(ErrorCode::ConfigError, "vdd, c_cell_nominal and cb_ratio must be positive");
    if (!(variation_sigma >= 0 && variation_sigma < 1))
      throw Error(ErrorCode::ConfigError, "variation_sigma must lie in [0, 1)");
    if (!(sense_offset_sigma >= 0 && bias_margin >= 0 && truncate_sigmas > 0 && cap_floor > 0))
      throw Error(ErrorCode::ConfigError, "offset sigma, bias margin and truncation must be non-negative");
  }

  double bitline_capacitance() const { return cb_ratio * c_cell_nominal; }
  double offset_sigma() const { return sense_offset_sigma * variation_sigma; }
};

struct CellCharge {
  double volts = 0.0;
  double cap_multiplier = 1.0;
};

/// Deviation of the shared bitline from Vdd/2, in volts.
inline double charge_share(std::span<const CellCharge> cells, const AnalogParams& p) {
  if (cells.empty()) throw Error(ErrorCode::InvalidArgument, "charge_share needs at least one cell");
  const double half = p.vdd / 2.0;
  double num = 0.0;
  double den = p.bitline_capacitance();
  for (const auto& c : cells) {
    const double cap = p.c_cell_nominal * c.cap_multiplier;
    num += cap * (c.volts - half);
    den += cap;
  }
  return num / den;
}

/// Latch decision of one sense amplifier. An exact tie resolves to `bias`;
/// without a bias a tie is unresolvable.
inline std::uint8_t sense(double deviation, double offset, std::optional<std::uint8_t> bias,
                          double threshold = 0.0) {
  const double v = deviation + offset;
  if (v > threshold) return 1;
  if (v < threshold) return 0;
  if (!bias) throw Error(ErrorCode::UnresolvedCell, "sense amplifier input exactly at threshold");
  return *bias;
}

/// Seeded process-variation realisation for one bank (or one Monte Carlo
/// worker). Capacitance multipliers are keyed by row; sense offsets by trial.
/// Not thread-safe: each worker owns its own sample.
class VariationSample {
 public:
  VariationSample(const AnalogParams& params, std::uint64_t seed, std::uint32_t n_bitlines,
                  double sigma_scale = 1.0)
      : params_(params), seed_(seed), n_bitlines_(n_bitlines), sigma_scale_(sigma_scale) {
    params_.validate();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t trial() const { return trial_; }
  std::uint32_t n_bitlines() const { return n_bitlines_; }
  double cap_sigma() const { return params_.variation_sigma * sigma_scale_; }
  double offset_sigma() const { return params_.offset_sigma() * sigma_scale_; }
  const AnalogParams& params() const { return params_; }

  void set_trial(std::uint64_t trial) {
    if (trial == trial_ && offsets_valid_) return;
    trial_ = trial;
    offsets_valid_ = false;
    if (!params_.static_variation) caps_.clear();
  }

  std::span<const float> cap_multipliers(std::uint32_t row) {
    auto it = caps_.find(row);
    if (it != caps_.end()) return it->second;
    std::vector<float> caps(n_bitlines_, 1.0f);
    const double sigma = cap_sigma();
    if (sigma > 0.0) {
      const std::uint64_t t = params_.static_variation ? 0 : trial_ + 1;
      auto gen = engine(0xca95u, row, t);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& c : caps) {
        double z;
        do z = normal(gen);
        while (std::abs(z) > params_.truncate_sigmas);
        c = static_cast<float>(std::max(params_.cap_floor, 1.0 + sigma * z));
      }
    }
    return caps_.emplace(row, std::move(caps)).first->second;
  }

  std::span<const float> sense_offsets() {
    if (!offsets_valid_) {
      offsets_.assign(n_bitlines_, 0.0f);
      const double sigma = offset_sigma();
      if (sigma > 0.0) {
        auto gen = engine(0x0ff5u, 0, trial_);
        std::normal_distribution<double> normal(0.0, sigma);
        for (auto& o : offsets_) o = static_cast<float>(normal(gen));
      }
      offsets_valid_ = true;
    }
    return offsets_;
  }

 private:
  std::mt19937_64 engine(std::uint32_t tag, std::uint32_t row, std::uint64_t trial) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32), tag, row,
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return std::mt19937_64(seq);
  }

  AnalogParams params_;
  std::uint64_t seed_;
  std::uint32_t n_bitlines_;
  double sigma_scale_;
  std::uint64_t trial_ = 0;
  bool offsets_valid_ = false;
  std::unordered_map<std::uint32_t, std::vector<float>> caps_;
  std::vector<float> offsets_;
};

/// Cell voltages for a fixed set of cells per bitline: `volts[slot * n_bitlines + b]`.
struct CellLayout {
  std::uint32_t slots = 0;
  std::uint32_t n_bitlines = 0;
  std::vector<double> volts;

  static CellLayout uniform(std::span<const double> slot_volts, std::uint32_t n_bitlines) {
    CellLayout l{static_cast<std::uint32_t>(slot_volts.size()), n_bitlines, {}};
    l.volts.reserve(std::size_t{l.slots} * n_bitlines);
    for (double v : slot_volts) l.volts.insert(l.volts.end(), n_bitlines, v);
    return l;
  }
  double at(std::uint32_t slot, std::uint32_t b) const { return volts[std::size_t{slot} * n_bitlines + b]; }
};

struct McResult {
  Bits expected;
  Bits stable;
  std::vector<std::uint32_t> correct_trials;
  std::uint32_t trials = 0;
  double success_rate = 0.0;
};

/// Monte Carlo stability of a sensing layout. A bitline is stable when every
/// trial senses `expected`.
inline McResult mc_success_rate(const CellLayout& layout, std::span<const std::uint8_t> expected,
                                const AnalogParams& params, std::uint32_t trials, std::uint64_t seed,
                                double sigma_scale = 1.0) {
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
  if (layout.slots == 0) throw Error(ErrorCode::InvalidArgument, "layout has no cells");
  if (expected.size() != layout.n_bitlines)
    throw Error(ErrorCode::InvalidArgument, "expected bits do not match layout width");
  VariationSample vs(params, seed, layout.n_bitlines, sigma_scale);
  const std::uint32_t B = layout.n_bitlines;
  McResult r;
  r.expected.assign(expected.begin(), expected.end());
  r.correct_trials.assign(B, 0);
  r.trials = trials;

  std::vector<double> deviation(B);
  std::vector<CellCharge> cells(layout.slots);
  auto compute_deviation = [&] {
    std::vector<std::span<const float>> caps;
    for (std::uint32_t s = 0; s < layout.slots; ++s) caps.push_back(vs.cap_multipliers(s));
    for (std::uint32_t b = 0; b < B; ++b) {
      for (std::uint32_t s = 0; s < layout.slots; ++s) cells[s] = {layout.at(s, b), caps[s][b]};
      deviation[b] = charge_share(cells, params);
    }
  };
  if (params.static_variation) compute_deviation();
  for (std::uint32_t t = 0; t < trials; ++t) {
    vs.set_trial(t);
    if (!params.static_variation) compute_deviation();
    const auto offsets = vs.sense_offsets();
    for (std::uint32_t b = 0; b < B; ++b) {
      const std::uint8_t bit = sense(deviation[b], offsets[b], std::uint8_t{0}, params.sense_threshold);
      r.correct_trials[b] += bit == expected[b];
    }
  }
  r.stable.resize(B);
  std::uint32_t stable = 0;
  for (std::uint32_t b = 0; b < B; ++b) {
    r.stable[b] = r.correct_trials[b] == trials;
    stable += r.stable[b];
  }
  r.success_rate = static_cast<double>(stable) / B;
  return r;
}

inline void write_mc_csv(std::ostream& os, const McResult& r) {
  os << "bitline,expected,stable,correct_trials,trials\n";
  for (std::size_t b = 0; b < r.stable.size(); ++b)
    os << b << ',' << int(r.expected[b]) << ',' << int(r.stable[b]) << ',' << r.correct_trials[b] << ','
       << r.trials << '\n';
}

}  // namespace mrasim
