// SPDX-License-Identifier: Apache-2.0
#pragma once

// Filter approximation sweeps, out-of-band PSD and Monte Carlo BER for
// OQAM-FBMC transceivers built from SOPOT-approximated prototype filters.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sopot_fbmc/channel.hpp"
#include "sopot_fbmc/csd.hpp"
#include "sopot_fbmc/errors.hpp"
#include "sopot_fbmc/fbmc.hpp"
#include "sopot_fbmc/greedy.hpp"
#include "sopot_fbmc/io.hpp"
#include "sopot_fbmc/psd.hpp"
#include "sopot_fbmc/qam.hpp"
#include "sopot_fbmc/sopot.hpp"

namespace sopot::sim {

using fbmc::FbmcConfig;
using fbmc::PrototypeFilter;

// ---------------------------------------------------------------------------
// Parallel helpers

// Hardware concurrency, capped by SOPOT_FBMC_THREADS when set.
inline unsigned default_thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SOPOT_FBMC_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
}

// ---------------------------------------------------------------------------
// Filter approximation

enum class Method { csd, sdl, mpgbp };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::csd: return "CSD";
    case Method::sdl: return "SDL";
    case Method::mpgbp: return "MPGBP";
  }
  return "?";
}

inline Method parse_method(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "csd") return Method::csd;
  if (s == "sdl") return Method::sdl;
  if (s == "mpgbp") return Method::mpgbp;
  throw invalid_input("unknown approximation method '" + s + "'");
}

struct ApproximationSpec {
  Method method = Method::sdl;
  int wordlength = 4;          // CSD only
  double spt_per_coeff = 1.8;  // SDL/MPGBP, ignored when max_spts > 0
  std::size_t max_spts = 0;
  int max_depth = default_depth_limit;

  std::size_t budget_for(std::size_t length) const {
    if (max_spts > 0) return max_spts;
    if (!(spt_per_coeff > 0.0) || !std::isfinite(spt_per_coeff)) throw invalid_input("SPT/coeff must be positive");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spt_per_coeff * static_cast<double>(length))));
  }
};

struct ApproximatedFilter {
  SopotApprox sopot;          // raw terms; reconstruct() yields the coefficients of `filter`
  PrototypeFilter filter;
  std::size_t raw_spts = 0;
  std::size_t merged_spts = 0;
  std::optional<PursuitTrace> trace;

  double raw_spt_per_coeff() const { return static_cast<double>(raw_spts) / static_cast<double>(filter.length()); }
  double merged_spt_per_coeff() const { return static_cast<double>(merged_spts) / static_cast<double>(filter.length()); }
};

// log2 of the polyphase tap gain G = 2^ceil(log2 M). The approximations act
// on the taps h = G g (the 1/M of the inverse DFT folded into the network);
// G is a power of two, so it moves into the SOPOT scale exponent exactly.
inline int tap_gain_log2(std::size_t subcarriers) {
  int e = 0;
  while ((std::size_t{1} << e) < subcarriers) ++e;
  return e;
}

inline ApproximatedFilter approximate_filter(const PrototypeFilter& g, const ApproximationSpec& spec) {
  const int gain = tap_gain_log2(g.subcarriers());
  std::vector<double> taps(g.length());
  for (std::size_t m = 0; m < g.length(); ++m) taps[m] = std::ldexp(g[m], gain);

  ApproximatedFilter out;
  SopotApprox approx;
  if (spec.method == Method::csd) {
    approx = csd_vector_headroom(taps, spec.wordlength);
  } else {
    const auto scaled = unit_inf_scale(taps);
    const QuantizerBudget budget{spec.budget_for(g.length()), spec.max_depth};
    auto result = spec.method == Method::sdl ? sdl_approximate(scaled.values, budget) : mpgbp_approximate(scaled.values, budget);
    approx = result.approx.with_scale_exponent(scaled.exponent);
    out.trace = std::move(result.trace);
  }
  out.sopot = approx.with_scale_exponent(approx.scale_exponent() - gain);
  out.raw_spts = spt_count(out.sopot);
  out.merged_spts = spt_count(merge_canonical(out.sopot));
  out.filter = PrototypeFilter(reconstruct(out.sopot), g.subcarriers(), g.overlap());
  return out;
}

// 10 log10 of the mean squared coefficient error; -inf for an exact match.
inline double approximation_mse(std::span<const double> g, std::span<const double> ghat) {
  if (g.size() != ghat.size()) throw invalid_input("approximation_mse: length mismatch");
  if (g.empty()) throw invalid_input("approximation_mse: empty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += (g[i] - ghat[i]) * (g[i] - ghat[i]);
  if (acc == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(acc / static_cast<double>(g.size()));
}

inline double to_db(double x) { return x > 0.0 ? 10.0 * std::log10(x) : -std::numeric_limits<double>::infinity(); }

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::string method; // CSD, SDL, MPGBP or reference
  std::size_t wordlength_or_budget = 0;
  double spt_per_coeff_raw = 0.0;
  double spt_per_coeff_merged = 0.0;
  double mse_db = 0.0;
  double interference_db = std::numeric_limits<double>::quiet_NaN();
};

struct SweepSpec {
  std::vector<Method> methods{Method::csd, Method::sdl, Method::mpgbp};
  std::vector<int> csd_wordlengths{3, 4, 5, 6, 7, 8};
  std::vector<double> complexity_grid; // SPT/coeff for SDL/MPGBP
  int max_depth = default_depth_limit;
};

// Default grid for the vector methods: 1.0 to 3.5 step 0.25.
inline std::vector<double> default_complexity_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(1.0 + 0.25 * i);
  return grid;
}

// Average SPT/coeff CSD reaches at each wordlength; the matched grid for the
// vector methods.
inline std::vector<double> csd_matched_grid(const PrototypeFilter& g, std::span<const int> wordlengths) {
  std::vector<double> grid;
  for (int b : wordlengths) grid.push_back(approximate_filter(g, {Method::csd, b}).raw_spt_per_coeff());
  return grid;
}

namespace detail {

inline SweepRow sweep_row(const PrototypeFilter& g, const ApproximationSpec& spec, bool with_interference) {
  const auto approx = approximate_filter(g, spec);
  SweepRow row;
  row.method = to_string(spec.method);
  row.wordlength_or_budget = spec.method == Method::csd ? static_cast<std::size_t>(spec.wordlength) : spec.budget_for(g.length());
  row.spt_per_coeff_raw = approx.raw_spt_per_coeff();
  row.spt_per_coeff_merged = approx.merged_spt_per_coeff();
  row.mse_db = approximation_mse(g.coefficients(), approx.filter.coefficients());
  if (with_interference) row.interference_db = to_db(fbmc::interference_variance(approx.filter));
  return row;
}

inline std::vector<SweepRow> run_sweep(const PrototypeFilter& g, const SweepSpec& spec, bool with_interference) {
  std::vector<ApproximationSpec> jobs;
  for (Method m : spec.methods) {
    if (m == Method::csd) {
      for (int b : spec.csd_wordlengths) jobs.push_back({m, b, 0.0, 0, spec.max_depth});
    } else {
      if (spec.complexity_grid.empty()) throw invalid_input("complexity grid must not be empty");
      for (double c : spec.complexity_grid) jobs.push_back({m, 0, c, 0, spec.max_depth});
    }
  }
  std::vector<SweepRow> rows(jobs.size());
  parallel_for(jobs.size(), default_thread_count(), [&](std::size_t i) { rows[i] = sweep_row(g, jobs[i], with_interference); });
  return rows;
}

} // namespace detail

inline std::vector<SweepRow> run_mse_sweep(const PrototypeFilter& g, const SweepSpec& spec) {
  return detail::run_sweep(g, spec, false);
}

// As run_mse_sweep plus sigma_I^2; the first row is the unapproximated filter.
inline std::vector<SweepRow> run_interference_sweep(const PrototypeFilter& g, const SweepSpec& spec) {
  SweepRow ref;
  ref.method = "reference";
  ref.mse_db = -std::numeric_limits<double>::infinity();
  ref.interference_db = to_db(fbmc::interference_variance(g));
  auto rows = detail::run_sweep(g, spec, true);
  rows.insert(rows.begin(), ref);
  return rows;
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "method,wordlength_or_budget,spt_per_coeff_raw,spt_per_coeff_merged,mse_db,interference_db\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.wordlength_or_budget << ',' << io::format_g12(r.spt_per_coeff_raw) << ','
        << io::format_g12(r.spt_per_coeff_merged) << ',' << io::format_g12(r.mse_db) << ','
        << io::format_g12(r.interference_db) << '\n';
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  const auto doc = io::read_csv(in);
  io::expect_header(doc, {"method", "wordlength_or_budget", "spt_per_coeff_raw", "spt_per_coeff_merged", "mse_db", "interference_db"});
  std::vector<SweepRow> rows;
  for (const auto& f : doc.rows)
    rows.push_back({f[0], static_cast<std::size_t>(io::parse_int(f[1])), io::parse_double(f[2]), io::parse_double(f[3]),
                    io::parse_double(f[4]), io::parse_double(f[5])});
  return rows;
}

// ---------------------------------------------------------------------------
// Random frames

// Uniform random bits for every active subcarrier of every block, mapped to a
// QAM grid (inactive subcarriers stay zero). Returns the bits in grid order.
inline std::vector<std::uint8_t> random_qam_frame(const FbmcConfig& cfg, const QamConstellation& qam, std::uint64_t seed,
                                                  fbmc::QamGrid& grid) {
  grid = fbmc::QamGrid(cfg.subcarriers, cfg.blocks);
  const std::size_t bps = qam.bits_per_symbol();
  std::vector<std::uint8_t> bits(cfg.subcarriers * cfg.blocks * bps, 0);
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < cfg.subcarriers; ++k) {
    if (!cfg.is_active(k)) continue;
    for (std::size_t n = 0; n < cfg.blocks; ++n) {
      auto sym = std::span(bits).subspan((k * cfg.blocks + n) * bps, bps);
      std::uint64_t word = rng();
      for (auto& b : sym) {
        b = static_cast<std::uint8_t>(word & 1u);
        word >>= 1;
      }
      grid(k, n) = qam.map(sym);
    }
  }
  return bits;
}

// ---------------------------------------------------------------------------
// PSD

struct PsdSpec {
  std::size_t frames = 100;
  std::size_t segment_length = 512;
  double overlap_fraction = 0.5;
  unsigned order = 4;
  std::uint64_t seed = 1;
  unsigned threads = 0; // 0: default_thread_count()
};

// Bins whose nearest subcarriers (+-2 spacings) are all active.
inline std::vector<bool> in_band_bins(const PsdEstimate& psd, const FbmcConfig& cfg) {
  const auto M = static_cast<std::int64_t>(cfg.subcarriers);
  std::vector<bool> inside(psd.frequencies.size(), false);
  for (std::size_t i = 0; i < psd.frequencies.size(); ++i) {
    const double u = psd.frequencies[i] * static_cast<double>(M);
    bool all = true;
    for (auto k = static_cast<std::int64_t>(std::floor(u)) - 2; k <= static_cast<std::int64_t>(std::ceil(u)) + 2; ++k)
      all = all && cfg.is_active(static_cast<std::size_t>(((k % M) + M) % M));
    inside[i] = all;
  }
  return inside;
}

// Averaged Welch PSD of `frames` independent frames, shifted so the mean
// in-band level is 0 dB.
inline PsdEstimate run_psd_experiment(const FbmcConfig& cfg, const PrototypeFilter& filter, const PsdSpec& spec) {
  cfg.validate();
  if (filter.subcarriers() != cfg.subcarriers) throw invalid_input("filter and configuration disagree on subcarriers");
  if (spec.frames == 0) throw invalid_input("PSD needs at least one frame");
  const QamConstellation qam(spec.order);

  std::vector<WelchAccumulator> per_frame(spec.frames, WelchAccumulator(spec.segment_length, spec.overlap_fraction));
  parallel_for(spec.frames, spec.threads ? spec.threads : default_thread_count(), [&](std::size_t f) {
    fbmc::QamGrid grid;
    random_qam_frame(cfg, qam, derive_seed(spec.seed, f), grid);
    per_frame[f].add(fbmc::synthesize(fbmc::oqam_map(grid), filter));
  });
  WelchAccumulator total(spec.segment_length, spec.overlap_fraction);
  for (const auto& acc : per_frame) total.merge(acc);

  auto psd = total.estimate();
  const auto inside = in_band_bins(psd, cfg);
  double plateau = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < inside.size(); ++i)
    if (inside[i]) {
      plateau += psd.power[i];
      ++count;
    }
  if (count == 0) throw invalid_input("no in-band bins to normalize against");
  plateau /= static_cast<double>(count);
  for (std::size_t i = 0; i < psd.power.size(); ++i) {
    psd.power[i] /= plateau;
    psd.psd_db[i] = to_db(psd.power[i]);
  }
  return psd;
}

// Mean linear PSD over bins with lo <= |f| <= hi, in dB.
inline double band_average_db(const PsdEstimate& psd, double lo, double hi) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < psd.frequencies.size(); ++i) {
    const double f = std::abs(psd.frequencies[i]);
    if (f >= lo && f <= hi) {
      acc += psd.power[i];
      ++n;
    }
  }
  if (n == 0) throw invalid_input("empty frequency band");
  return to_db(acc / static_cast<double>(n));
}

struct LabeledPsd {
  std::string label;
  PsdEstimate psd;
};

inline void write_psd_csv(std::ostream& out, std::span<const LabeledPsd> curves) {
  if (curves.empty()) throw invalid_input("no PSD curves to write");
  out << "freq";
  for (const auto& c : curves) out << ',' << c.label;
  out << '\n';
  const auto& freqs = curves.front().psd.frequencies;
  for (const auto& c : curves)
    if (c.psd.frequencies != freqs) throw invalid_input("PSD curves use different frequency grids");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    out << io::format_g12(freqs[i]);
    for (const auto& c : curves) out << ',' << io::format_g12(c.psd.psd_db[i]);
    out << '\n';
  }
}

inline std::vector<LabeledPsd> read_psd_csv(std::istream& in) {
  const auto doc = io::read_csv(in);
  if (doc.header.size() < 2 || doc.header[0] != "freq") throw format_error("unexpected PSD header");
  std::vector<LabeledPsd> curves(doc.header.size() - 1);
  for (std::size_t c = 0; c < curves.size(); ++c) curves[c].label = doc.header[c + 1];
  for (const auto& row : doc.rows) {
    const double f = io::parse_double(row[0]);
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const double db = io::parse_double(row[c + 1]);
      curves[c].psd.frequencies.push_back(f);
      curves[c].psd.psd_db.push_back(db);
      curves[c].psd.power.push_back(std::pow(10.0, db / 10.0));
    }
  }
  return curves;
}

// ---------------------------------------------------------------------------
// BER

struct BerPoint {
  double ebn0_db = 0.0;
  std::uint64_t bits_sent = 0;
  std::uint64_t bit_errors = 0;

  double ber() const { return bits_sent ? static_cast<double>(bit_errors) / static_cast<double>(bits_sent) : 0.0; }
};

struct StopRule {
  std::uint64_t min_errors = 100;
  std::uint64_t max_bits = 1'000'000;
  std::uint64_t fixed_frames = 0; // > 0: run exactly this many frames
};

struct BerSpec {
  unsigned order = 4;
  std::vector<double> ebn0_db;
  StopRule stop;
  std::uint64_t seed = 1;
  std::size_t edge_guard_blocks = std::numeric_limits<std::size_t>::max(); // default: overlap (2 K_ov PAM instants)
  unsigned threads = 0;
  std::size_t batch_frames = 16; // stop rule is checked between batches
};

struct BerLink {
  PrototypeFilter tx;
  PrototypeFilter rx;
};

struct FrameErrors {
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
};

// One frame through synthesis, AWGN and analysis. Bits and noise depend only
// on (seed, frame), so different filters see common random numbers.
inline FrameErrors simulate_frame(const FbmcConfig& cfg, const BerLink& link, const QamConstellation& qam, double ebn0_db,
                                  std::uint64_t seed, std::uint64_t frame, std::size_t guard_blocks) {
  fbmc::QamGrid grid;
  const auto bits = random_qam_frame(cfg, qam, derive_seed(seed, frame, 0), grid);
  auto signal = fbmc::synthesize(fbmc::oqam_map(grid), link.tx);
  awgn_apply(signal, NoiseSpec{ebn0_db, derive_seed(seed, frame, 1), qam.bits_per_symbol(), link.tx.energy()});
  const auto estimate = fbmc::oqam_demap(fbmc::analyze(signal, link.rx));

  const std::size_t bps = qam.bits_per_symbol();
  std::vector<std::uint8_t> decided(bps);
  FrameErrors out;
  for (std::size_t k = 0; k < cfg.subcarriers; ++k) {
    if (!cfg.is_active(k)) continue;
    for (std::size_t n = guard_blocks; n + guard_blocks < cfg.blocks; ++n) {
      qam.demap(estimate(k, n), decided);
      const auto* sent = &bits[(k * cfg.blocks + n) * bps];
      for (std::size_t b = 0; b < bps; ++b) out.errors += decided[b] != sent[b] ? 1 : 0;
      out.bits += bps;
    }
  }
  return out;
}

inline std::vector<BerPoint> run_ber(const FbmcConfig& cfg, const BerLink& link, const BerSpec& spec) {
  cfg.validate();
  if (link.tx.subcarriers() != cfg.subcarriers || link.rx.subcarriers() != cfg.subcarriers ||
      link.tx.length() != link.rx.length())
    throw invalid_input("filters and configuration disagree");
  const QamConstellation qam(spec.order);
  const std::size_t guard = spec.edge_guard_blocks == std::numeric_limits<std::size_t>::max() ? cfg.overlap : spec.edge_guard_blocks;
  if (cfg.blocks <= 2 * guard) throw invalid_input("frame too short for the edge guard");
  const unsigned threads = spec.threads ? spec.threads : default_thread_count();
  const std::size_t batch = std::max<std::size_t>(1, spec.batch_frames);

  std::vector<BerPoint> points;
  for (double ebn0 : spec.ebn0_db) {
    BerPoint pt{ebn0, 0, 0};
    std::uint64_t frame = 0;
    while (true) {
      std::size_t todo = batch;
      if (spec.stop.fixed_frames > 0) todo = static_cast<std::size_t>(std::min<std::uint64_t>(batch, spec.stop.fixed_frames - frame));
      std::vector<FrameErrors> results(todo);
      parallel_for(todo, threads, [&](std::size_t i) {
        results[i] = simulate_frame(cfg, link, qam, ebn0, spec.seed, frame + i, guard);
      });
      for (const auto& r : results) {
        pt.bits_sent += r.bits;
        pt.bit_errors += r.errors;
      }
      frame += todo;
      if (spec.stop.fixed_frames > 0) {
        if (frame >= spec.stop.fixed_frames) break;
      } else if (pt.bit_errors >= spec.stop.min_errors || pt.bits_sent >= spec.stop.max_bits) {
        break;
      }
    }
    points.push_back(pt);
  }
  return points;
}

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Gray-coded 4-QAM over AWGN: Q(sqrt(2 Eb/N0)).
inline double qpsk_ber(double ebn0_db) { return q_function(std::sqrt(2.0 * std::pow(10.0, ebn0_db / 10.0))); }

struct LabeledBer {
  std::string label;
  std::vector<BerPoint> points;
};

inline void write_ber_csv(std::ostream& out, std::span<const LabeledBer> curves) {
  out << "label,ebn0_db,bits,errors,ber\n";
  for (const auto& c : curves)
    for (const auto& p : c.points)
      out << c.label << ',' << io::format_g12(p.ebn0_db) << ',' << p.bits_sent << ',' << p.bit_errors << ','
          << io::format_g12(p.ber()) << '\n';
}

inline std::vector<LabeledBer> read_ber_csv(std::istream& in) {
  const auto doc = io::read_csv(in);
  io::expect_header(doc, {"label", "ebn0_db", "bits", "errors", "ber"});
  std::vector<LabeledBer> curves;
  for (const auto& f : doc.rows) {
    if (curves.empty() || curves.back().label != f[0]) curves.push_back({f[0], {}});
    curves.back().points.push_back(
        {io::parse_double(f[1]), static_cast<std::uint64_t>(io::parse_int(f[2])), static_cast<std::uint64_t>(io::parse_int(f[3]))});
  }
  return curves;
}

// Eb/N0 where a BER curve crosses `target`, by linear interpolation of
// log10(BER) between the bracketing points. nullopt when not bracketed.
inline std::optional<double> ebn0_at_ber(std::span<const BerPoint> curve, double target) {
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const double b0 = curve[i].ber(), b1 = curve[i + 1].ber();
    if (b0 >= target && b1 <= target && b0 > 0.0 && b1 > 0.0) {
      const double l0 = std::log10(b0), l1 = std::log10(b1), lt = std::log10(target);
      if (l0 == l1) return curve[i].ebn0_db;
      return curve[i].ebn0_db + (lt - l0) / (l1 - l0) * (curve[i + 1].ebn0_db - curve[i].ebn0_db);
    }
  }
  return std::nullopt;
}

} // namespace sopot::sim
