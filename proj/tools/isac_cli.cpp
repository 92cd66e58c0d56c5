// isac_cli: simulate / estimate / crlb / af / sweep
//
// exit status: 0 ok, 2 config error, 3 numeric limit, 64 unknown flag

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "isac/isac.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 64;

std::optional<double> snr_arg(const isac::Scenario& s, const std::optional<double>& flag) {
  if (flag) return std::isinf(*flag) ? std::nullopt : flag;
  if (s.snr_db.empty()) return std::nullopt;
  return s.snr_db.front();
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw isac::ConfigError("cannot write " + path);
  os << text;
}

struct SimulateArgs {
  std::string scenario, out, echo;
  std::size_t trial = 0;
  std::optional<double> snr;
};

int run_simulate(const SimulateArgs& a) {
  const auto s = isac::load_scenario(a.scenario);
  const auto grid = isac::scenario_frame(s, a.trial);
  const auto tx = isac::synthesize(grid, s.waveform);
  isac::save_iq(a.out, tx);
  if (!a.echo.empty()) {
    const isac::NoiseSpec noise{snr_arg(s, a.snr), isac::trial_seed(s.seed, a.trial, 2)};
    isac::save_iq(a.echo, isac::echo_sample_domain(tx, s.targets, noise, s.long_range.interpolation));
  }
  return 0;
}

struct EstimateArgs {
  std::string scenario, tx, rx, method;
  int x = 0;
  std::size_t trial = 0;
  std::size_t targets = 0;
  std::optional<double> snr;
};

int run_estimate(const EstimateArgs& a) {
  auto s = isac::load_scenario(a.scenario);
  isac::EstimatorSpec spec = s.estimators.front();
  if (!a.method.empty()) spec.method = isac::parse_method(a.method);
  if (a.x > 0) spec.x = a.x;
  if (spec.x < 1) throw isac::ConfigError("X must be >= 1");
  if (a.targets > 0) s.targets.resize(a.targets, s.targets.back());

  isac::Trial t;
  if (!a.tx.empty() || !a.rx.empty()) {
    if (a.tx.empty() || a.rx.empty()) throw isac::ConfigError("--tx and --rx go together");
    t.tx_grid = isac::scenario_frame(s, a.trial);
    t.tx_stream = isac::load_iq(a.tx);
    t.rx_stream = isac::load_iq(a.rx);
    t.tx_grid.cells = isac::demodulate(t.tx_stream, s.waveform);
    t.rx_grid = t.tx_grid;
    t.rx_grid.cells = isac::demodulate(*t.rx_stream, s.waveform);
  } else {
    if (isac::is_long_range(spec.method)) s.domain = isac::Domain::Sample;
    t = isac::make_trial(s, a.trial, snr_arg(s, a.snr));
  }
  const auto est = isac::run_estimator(s, t, spec);
  std::cout << isac::estimate_json(est, isac::method_name(spec.method)).dump(2) << '\n';
  return 0;
}

struct CrlbArgs {
  std::optional<double> snr, snr_db;
  double gain_re = 1.0, gain_im = 0.0;
  std::size_t group_len = 128, vcp_len = 31, groups = 48, n_sub = 256;
  double t_b = isac::reference_config().sample_interval();
  double f_c = isac::reference_config().f_c;
  bool coded = false;
  double log_base = 10.0;
};

int run_crlb(const CrlbArgs& a) {
  if (!a.snr && !a.snr_db) throw isac::ConfigError("give --snr or --snr-db");
  isac::CrlbParams p;
  p.h = {a.gain_re, a.gain_im};
  p.snr = a.snr ? *a.snr : isac::from_db10(*a.snr_db);
  p.group_len = a.group_len;
  p.vcp_len = a.vcp_len;
  p.groups = a.groups;
  p.n_sub = a.n_sub;
  p.t_b = a.t_b;
  p.f_c = a.f_c;
  p.coherent_gain = isac::coherent_gain(a.group_len, a.coded, a.log_base);
  const auto r = isac::crlb(p);
  std::printf("crlb_eps %.17g\ncrlb_ups %.17g\ncrlb_r_m2 %.17g\ncrlb_v_m2s2 %.17g\n", r.crlb_eps, r.crlb_ups, r.crlb_r,
              r.crlb_v);
  return 0;
}

struct AfArgs {
  std::string scenario, out = "-";
  std::size_t trial = 0;
  int max_lag = -1;
  int doppler_half = 8;
  std::optional<double> doppler_step;
  double floor_db = -60.0;
};

int run_af(const AfArgs& a) {
  const auto s = isac::load_scenario(a.scenario, false);
  const auto tx = isac::synthesize(isac::scenario_frame(s, a.trial), s.waveform);
  const int lag = a.max_lag >= 0 ? a.max_lag : static_cast<int>(s.waveform.fft_size) - 1;
  const auto surface = isac::ambiguity(tx, isac::delay_grid(lag),
                                       isac::doppler_grid(a.doppler_half, a.doppler_step.value_or(isac::default_doppler_step(tx))));
  std::ostringstream csv;
  isac::write_surface_csv(csv, surface, a.floor_db);
  write_text(a.out, csv.str());
  const auto m = isac::sidelobe_metrics(surface);
  auto db = [](double v) { return std::isinf(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  const nlohmann::json j{{"peak_sidelobe_db", db(m.peak_sidelobe_db)},
                         {"cut_sidelobe_db", db(m.cut_sidelobe_db)},
                         {"decay_slope_per_s", m.decay_slope}};
  (a.out == "-" ? std::cerr : std::cout) << j.dump() << '\n';
  return 0;
}

struct SweepArgs {
  std::string scenario, csv, json;
  unsigned workers = 1;
  bool timing = false;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
};

int run_sweep(const SweepArgs& a) {
  auto s = isac::load_scenario(a.scenario);
  if (a.trials) s.trials = *a.trials;
  if (a.seed) s.seed = *a.seed;
  const auto r = isac::run_sweep(s, {a.workers, a.timing});
  std::ostringstream csv;
  isac::write_sweep_csv(csv, r);
  if (!a.json.empty()) write_text(a.json, isac::sweep_json(r).dump(2) + "\n");
  if (!a.csv.empty() || a.json.empty()) write_text(a.csv.empty() ? "-" : a.csv, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OFDM ISAC baseband simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "write the transmit frame (and echo) as I/Q files");
  c_sim->add_option("--scenario", sim.scenario)->required()->check(CLI::ExistingFile);
  c_sim->add_option("--out", sim.out, "transmit I/Q file")->required();
  c_sim->add_option("--echo", sim.echo, "echo I/Q file");
  c_sim->add_option("--trial", sim.trial);
  c_sim->add_option("--snr", sim.snr, "dB; default first scenario SNR, inf for noiseless");

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "range/velocity estimate from files or a synthetic trial");
  c_est->add_option("--scenario", est.scenario)->required()->check(CLI::ExistingFile);
  c_est->add_option("--tx", est.tx, "transmit I/Q file");
  c_est->add_option("--rx", est.rx, "echo I/Q file");
  c_est->add_option("--method", est.method, "2dfft | iter2dfft | cc | itercc");
  c_est->add_option("-X,--iterations", est.x);
  c_est->add_option("--trial", est.trial);
  c_est->add_option("--targets", est.targets, "number of targets to report");
  c_est->add_option("--snr", est.snr, "dB");

  CrlbArgs cr;
  auto* c_crlb = app.add_subcommand("crlb", "closed-form bounds for the grouped long-range model");
  auto* o_snr = c_crlb->add_option("--snr", cr.snr, "linear SNR");
  c_crlb->add_option("--snr-db", cr.snr_db)->excludes(o_snr);
  c_crlb->add_option("--gain-re", cr.gain_re);
  c_crlb->add_option("--gain-im", cr.gain_im);
  c_crlb->add_option("--group-len", cr.group_len, "N~");
  c_crlb->add_option("--vcp-len", cr.vcp_len, "Q~");
  c_crlb->add_option("--groups", cr.groups, "M~");
  c_crlb->add_option("--n-sub", cr.n_sub, "N");
  c_crlb->add_option("--t-b", cr.t_b, "sample interval (s)");
  c_crlb->add_option("--f-c", cr.f_c, "carrier (Hz)");
  c_crlb->add_flag("--coded", cr.coded);
  c_crlb->add_option("--log-base", cr.log_base);

  AfArgs af;
  auto* c_af = app.add_subcommand("af", "ambiguity surface of a scenario frame as CSV");
  c_af->add_option("--scenario", af.scenario)->required()->check(CLI::ExistingFile);
  c_af->add_option("--out", af.out, "CSV path, - for stdout");
  c_af->add_option("--trial", af.trial);
  c_af->add_option("--max-lag", af.max_lag, "samples; default N'-1");
  c_af->add_option("--doppler-cells", af.doppler_half, "cells on each side of zero");
  c_af->add_option("--doppler-step", af.doppler_step, "Hz");
  c_af->add_option("--floor-db", af.floor_db);

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep", "Monte Carlo RMSE sweep");
  c_sweep->add_option("--scenario", sw.scenario)->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--csv", sw.csv, "CSV path, - for stdout");
  c_sweep->add_option("--json", sw.json, "JSON path");
  c_sweep->add_option("--workers", sw.workers);
  c_sweep->add_flag("--timing", sw.timing, "record estimator wall time");
  c_sweep->add_option("--trials", sw.trials);
  c_sweep->add_option("--seed", sw.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_est) return run_estimate(est);
    if (*c_crlb) return run_crlb(cr);
    if (*c_af) return run_af(af);
    if (*c_sweep) return run_sweep(sw);
  } catch (const isac::NumericLimitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const isac::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
