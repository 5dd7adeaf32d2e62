// SPDX-License-Identifier: Apache-2.0
//
// sopot-fbmc: approximate prototype filters with SOPOT coefficients and run
// the filter-bank experiments on them.
//
// Every subcommand accepts --config FILE with key=value lines named after the
// long flags (flags on the command line win), and writes OUTPUT.manifest next
// to its main output: the fully resolved settings in the same key=value form,
// so `sopot-fbmc CMD --config OUTPUT.manifest` repeats the run.
//
// Exit codes: 0 success, 1 validation or I/O failure, 2 usage error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sopot_fbmc/sopot_fbmc.hpp"

namespace fs = std::filesystem;
using namespace sopot;

namespace {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key=value file -> options of `cmd` that were not set on the command line.
void apply_config(CLI::App& cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw usage_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    auto* opt = key == "config" || key == "help" ? nullptr : cmd.get_option_no_throw("--" + key);
    if (!opt) throw usage_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for " + cmd.get_name());
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::string option_value(const CLI::Option* opt) {
  if (opt->count() == 0) return opt->get_default_str();
  std::string v;
  for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
  return v;
}

// Resolved settings of `cmd`; `resolved` overrides entries whose effective
// value is computed after parsing.
void write_manifest(const CLI::App& cmd, const fs::path& path, const std::map<std::string, std::string>& resolved = {}) {
  io::write_file(path.string(), [&](std::ostream& out) {
    out << "# sopot-fbmc " << cmd.get_name() << " manifest\n"
        << "# rerun: sopot-fbmc " << cmd.get_name() << " --config " << path.filename().string() << '\n';
    for (const auto* opt : cmd.get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name == "config" || opt->get_lnames().empty()) continue;
      const auto it = resolved.find(name);
      out << name << " = \"" << (it != resolved.end() ? it->second : option_value(opt)) << "\"\n";
    }
  });
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto& f : io::split(s)) {
    f = trim(f);
    if (!f.empty()) out.push_back(f);
  }
  if (out.empty()) throw invalid_input("empty list '" + s + "'");
  return out;
}

// "a:step:b" (inclusive) or "x,y,z".
std::vector<double> parse_range(const std::string& s) {
  if (s.find(':') == std::string::npos) {
    std::vector<double> v;
    for (const auto& f : split_list(s)) v.push_back(io::parse_double(f));
    return v;
  }
  const auto parts = io::split(s, ':');
  if (parts.size() != 3) throw invalid_input("range must be start:step:stop, got '" + s + "'");
  const double a = io::parse_double(parts[0]), step = io::parse_double(parts[1]), b = io::parse_double(parts[2]);
  if (!(step > 0.0) || b < a) throw invalid_input("range needs step > 0 and stop >= start");
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(a + static_cast<double>(i) * step);
  return v;
}

struct FilterSource {
  std::string input;
  std::size_t subcarriers = 128;
  std::size_t overlap = 4;
  std::string out_dir = ".";

  void add(CLI::App& cmd, bool with_input = true) {
    if (with_input) cmd.add_option("-i,--input", input, "Prototype filter file (default: PHYDYAS)");
    cmd.add_option("--subcarriers", subcarriers, "Subcarrier count M")->capture_default_str();
    cmd.add_option("--overlap", overlap, "Overlap factor K_ov")->capture_default_str();
    cmd.add_option("--out-dir", out_dir, "Directory for relative output paths")->capture_default_str();
  }

  fbmc::PrototypeFilter load(const CLI::App& cmd) const {
    if (input.empty()) return fbmc::phydyas_prototype(subcarriers, overlap);
    auto g = io::read_file(input, [](std::istream& in) { return io::read_filter(in); });
    if ((cmd.count("--subcarriers") && g.subcarriers() != subcarriers) || (cmd.count("--overlap") && g.overlap() != overlap))
      throw invalid_input("--subcarriers/--overlap disagree with the filter file");
    return g;
  }

  fs::path output(const std::string& name) const {
    fs::path p(name);
    if (p.is_relative()) p = fs::path(out_dir) / p;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }
};

fs::path manifest_for(const fs::path& output) { return fs::path(output.string() + ".manifest"); }

// "ref", "csd:B", "sdl:X", "mpgbp:X" with X in SPT/coeff.
struct FilterChoice {
  std::string label;
  bool reference = false;
  sim::ApproximationSpec spec;
};

FilterChoice parse_filter_choice(const std::string& token, int bmax) {
  FilterChoice c;
  c.label = token;
  if (token == "ref" || token == "reference") {
    c.reference = true;
    c.label = "reference";
    return c;
  }
  const auto colon = token.find(':');
  if (colon == std::string::npos) throw invalid_input("filter '" + token + "' must be ref or METHOD:VALUE");
  c.spec.method = sim::parse_method(token.substr(0, colon));
  c.spec.max_depth = bmax;
  const std::string value = token.substr(colon + 1);
  if (c.spec.method == sim::Method::csd)
    c.spec.wordlength = static_cast<int>(io::parse_int(value));
  else
    c.spec.spt_per_coeff = io::parse_double(value);
  return c;
}

fbmc::PrototypeFilter realize(const FilterChoice& c, const fbmc::PrototypeFilter& g) {
  return c.reference ? g : sim::approximate_filter(g, c.spec).filter;
}

// ---------------------------------------------------------------------------

struct FilterCmd {
  FilterSource src;
  std::string output = "g.csv";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("filter", "Write the PHYDYAS prototype filter");
    src.add(*cmd, false);
    cmd->add_option("-o,--output", output, "Filter file")->capture_default_str();
  }

  void run(const CLI::App& cmd) const {
    const auto g = src.load(cmd);
    const auto path = src.output(output);
    io::write_file(path.string(), [&](std::ostream& out) { io::write_filter(out, g); });
    write_manifest(cmd, manifest_for(path));
    std::printf("wrote %zu coefficients (M=%zu, K_ov=%zu) to %s\n", g.length(), g.subcarriers(), g.overlap(), path.c_str());
  }
};

struct ApproxCmd {
  FilterSource src;
  std::string method = "sdl";
  int bits = 4;
  double spt_per_coeff = 1.8;
  std::size_t max_spts = 0;
  int bmax = default_depth_limit;
  std::string output = "ghat.csv";
  std::string trace;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("approx", "Approximate a filter with SOPOT coefficients");
    src.add(*cmd);
    cmd->add_option("--method", method, "csd, sdl or mpgbp")->capture_default_str();
    cmd->add_option("--bits", bits, "CSD wordlength B")->capture_default_str();
    cmd->add_option("--spt-per-coeff", spt_per_coeff, "SDL/MPGBP budget per coefficient")->capture_default_str();
    cmd->add_option("--max-spts", max_spts, "SDL/MPGBP total budget (overrides --spt-per-coeff)")->capture_default_str();
    cmd->add_option("--bmax", bmax, "Deepest SPT plane for SDL/MPGBP")->capture_default_str();
    cmd->add_option("-o,--output", output, "Approximated filter file")->capture_default_str();
    cmd->add_option("--trace", trace, "SOPOT trace file (optional)");
  }

  void run(const CLI::App& cmd) const {
    if (src.input.empty()) throw usage_error("approx: --input is required");
    const auto g = src.load(cmd);
    sim::ApproximationSpec spec{sim::parse_method(method), bits, spt_per_coeff, max_spts, bmax};
    const auto a = sim::approximate_filter(g, spec);

    const auto path = src.output(output);
    io::write_file(path.string(), [&](std::ostream& out) { io::write_filter(out, a.filter); });
    if (!trace.empty()) io::write_file(src.output(trace).string(), [&](std::ostream& out) { io::write_trace(out, a.sopot); });
    write_manifest(cmd, manifest_for(path));
    std::printf("method=%s spt_count=%zu merged_spt_count=%zu spt_per_coeff=%.6g mse_db=%.6g\n", sim::to_string(spec.method).c_str(),
                a.raw_spts, a.merged_spts, a.raw_spt_per_coeff(), sim::approximation_mse(g.coefficients(), a.filter.coefficients()));
  }
};

struct SweepCmd {
  bool interference = false;
  FilterSource src;
  std::string methods = "csd,sdl,mpgbp";
  std::string bits = "3,4,5,6,7,8";
  std::string grid = "1:0.25:3.5";
  int bmax = default_depth_limit;
  std::string output = "sweep.csv";

  void add(CLI::App& app, bool with_interference) {
    interference = with_interference;
    auto* cmd = app.add_subcommand(with_interference ? "sweep-interference" : "sweep-mse",
                                   with_interference ? "Approximation MSE and residual interference per method"
                                                     : "Approximation MSE per method and complexity");
    src.add(*cmd);
    cmd->add_option("--methods", methods, "Comma-separated methods")->capture_default_str();
    cmd->add_option("--bits", bits, "CSD wordlengths")->capture_default_str();
    cmd->add_option("--grid", grid, "SPT/coeff grid for SDL/MPGBP: list, start:step:stop, or 'matched' (CSD densities)")
        ->capture_default_str();
    cmd->add_option("--bmax", bmax, "Deepest SPT plane")->capture_default_str();
    cmd->add_option("-o,--output", output, "Sweep CSV")->capture_default_str();
  }

  void run(const CLI::App& cmd) const {
    const auto g = src.load(cmd);
    sim::SweepSpec spec;
    spec.methods.clear();
    for (const auto& m : split_list(methods)) spec.methods.push_back(sim::parse_method(m));
    spec.csd_wordlengths.clear();
    for (const auto& b : split_list(bits)) spec.csd_wordlengths.push_back(static_cast<int>(io::parse_int(b)));
    spec.complexity_grid = grid == "matched" ? sim::csd_matched_grid(g, spec.csd_wordlengths) : parse_range(grid);
    spec.max_depth = bmax;

    const auto rows = interference ? sim::run_interference_sweep(g, spec) : sim::run_mse_sweep(g, spec);
    const auto path = src.output(output);
    io::write_file(path.string(), [&](std::ostream& out) { sim::write_sweep_csv(out, rows); });
    write_manifest(cmd, manifest_for(path));
    std::printf("wrote %zu rows to %s\n", rows.size(), path.c_str());
  }
};

struct PsdCmd {
  FilterSource src;
  std::string filters = "ref,csd:4,sdl:1.8";
  std::size_t blocks = 64;
  std::size_t active = 64;
  std::size_t frames = 100;
  std::size_t segment = 512;
  double segment_overlap = 0.5;
  unsigned order = 4;
  int bmax = default_depth_limit;
  std::uint64_t seed = 1;
  std::string output = "psd.csv";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("psd", "Averaged Welch PSD of the transmit signal per filter");
    src.add(*cmd);
    cmd->add_option("--filters", filters, "Comma-separated: ref, csd:B, sdl:X, mpgbp:X")->capture_default_str();
    cmd->add_option("--blocks", blocks, "QAM blocks per frame")->capture_default_str();
    cmd->add_option("--active", active, "Central active subcarriers (0: all)")->capture_default_str();
    cmd->add_option("--frames", frames, "Independent frames")->capture_default_str();
    cmd->add_option("--segment", segment, "Welch segment length")->capture_default_str();
    cmd->add_option("--segment-overlap", segment_overlap, "Welch segment overlap fraction")->capture_default_str();
    cmd->add_option("--order", order, "QAM order")->capture_default_str();
    cmd->add_option("--bmax", bmax, "Deepest SPT plane")->capture_default_str();
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_option("-o,--output", output, "PSD CSV")->capture_default_str();
  }

  void run(const CLI::App& cmd) const {
    const auto g = src.load(cmd);
    auto cfg = g.config(blocks);
    if (active > 0) cfg.active_mask = fbmc::central_mask(g.subcarriers(), active);
    const sim::PsdSpec spec{frames, segment, segment_overlap, order, seed, 0};

    std::vector<sim::LabeledPsd> curves;
    for (const auto& token : split_list(filters)) {
      const auto choice = parse_filter_choice(token, bmax);
      curves.push_back({choice.label, sim::run_psd_experiment(cfg, realize(choice, g), spec)});
    }
    const auto path = src.output(output);
    io::write_file(path.string(), [&](std::ostream& out) { sim::write_psd_csv(out, curves); });
    write_manifest(cmd, manifest_for(path));
    std::printf("wrote %zu PSD curves to %s\n", curves.size(), path.c_str());
  }
};

struct BerCmd {
  FilterSource src;
  std::string filters = "ref,csd:4,sdl:1.8";
  std::string quantize = "both";
  unsigned order = 4;
  std::string ebn0;
  std::size_t blocks = 64;
  std::uint64_t frames = 0;
  std::uint64_t min_errors = 100;
  std::uint64_t max_bits = 1'000'000;
  std::size_t guard = 0;
  int bmax = default_depth_limit;
  std::uint64_t seed = 1;
  std::string output = "ber.csv";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("ber", "Monte Carlo BER over AWGN per filter");
    src.add(*cmd);
    cmd->add_option("--filters", filters, "Comma-separated: ref, csd:B, sdl:X, mpgbp:X")->capture_default_str();
    cmd->add_option("--quantize", quantize, "Which side uses the approximated filter: both, tx or rx")->capture_default_str();
    cmd->add_option("--order", order, "QAM order (4, 16, 64)")->capture_default_str();
    cmd->add_option("--ebn0", ebn0, "Eb/N0 in dB: start:step:stop or list (default 0:2:12, 0:3:30 for 64-QAM)");
    cmd->add_option("--blocks", blocks, "QAM blocks per frame")->capture_default_str();
    cmd->add_option("--frames", frames, "Run exactly this many frames per point (0: stop rule)")->capture_default_str();
    cmd->add_option("--min-errors", min_errors, "Stop rule: bit errors")->capture_default_str();
    cmd->add_option("--max-bits", max_bits, "Stop rule: bits")->capture_default_str();
    cmd->add_option("--guard", guard, "Edge blocks excluded from counting (0: overlap factor)")->capture_default_str();
    cmd->add_option("--bmax", bmax, "Deepest SPT plane")->capture_default_str();
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_option("-o,--output", output, "BER CSV")->capture_default_str();
  }

  void run(const CLI::App& cmd) const {
    if (quantize != "both" && quantize != "tx" && quantize != "rx") throw usage_error("--quantize must be both, tx or rx");
    const auto g = src.load(cmd);
    const auto cfg = g.config(blocks);
    const std::string axis = !ebn0.empty() ? ebn0 : order == 64 ? "0:3:30" : "0:2:12";
    sim::BerSpec spec;
    spec.order = order;
    spec.ebn0_db = parse_range(axis);
    spec.stop = {min_errors, max_bits, frames};
    spec.seed = seed;
    if (guard > 0) spec.edge_guard_blocks = guard;

    std::vector<sim::LabeledBer> curves;
    for (const auto& token : split_list(filters)) {
      const auto choice = parse_filter_choice(token, bmax);
      const auto q = realize(choice, g);
      const sim::BerLink link{quantize == "rx" ? g : q, quantize == "tx" ? g : q};
      curves.push_back({choice.label, sim::run_ber(cfg, link, spec)});
    }
    const auto path = src.output(output);
    io::write_file(path.string(), [&](std::ostream& out) { sim::write_ber_csv(out, curves); });
    write_manifest(cmd, manifest_for(path), {{"ebn0", axis}});
    std::printf("wrote %zu BER curves to %s\n", curves.size(), path.c_str());
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app("SOPOT approximation of FBMC prototype filters", "sopot-fbmc");
  app.require_subcommand(1);
  app.set_version_flag("--version", "sopot-fbmc 0.1.0");

  FilterCmd filter;
  ApproxCmd approx;
  SweepCmd sweep_mse, sweep_interference;
  PsdCmd psd;
  BerCmd ber;
  filter.add(app);
  approx.add(app);
  sweep_mse.add(app, false);
  sweep_interference.add(app, true);
  psd.add(app);
  ber.add(app);

  std::string config;
  for (auto* cmd : app.get_subcommands({})) cmd->add_option("--config", config, "key=value settings file (flags win)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto* cmd = app.get_subcommands().front();
  try {
    if (!config.empty()) apply_config(*cmd, config);
    const std::string name = cmd->get_name();
    if (name == "filter") filter.run(*cmd);
    else if (name == "approx") approx.run(*cmd);
    else if (name == "sweep-mse") sweep_mse.run(*cmd);
    else if (name == "sweep-interference") sweep_interference.run(*cmd);
    else if (name == "psd") psd.run(*cmd);
    else if (name == "ber") ber.run(*cmd);
  } catch (const usage_error& e) {
    std::cerr << "sopot-fbmc: " << e.what() << '\n';
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << "sopot-fbmc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sopot-fbmc: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
