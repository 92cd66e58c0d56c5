#pragma once

// Scenario files, Monte Carlo RMSE/CRLB sweeps and their CSV/JSON output.
//
// Scenario grammar (JSON object; every key optional unless noted):
//
//   name            string
//   waveform        {delta_f, f_c, n_sub, n_pilot, m_pilot, n_data, m_data,
//                    fft_size, cp_len, t_sym_includes_cp, modulation: "bpsk"|"qpsk"}
//                   missing keys keep the reference defaults
//   coded           bool, Golay-code the data block (N_d must be a power of two)
//   payload         "random" | "zeros"
//   pilot_seed      integer; pilots are fixed across trials
//   targets         required, [{range, velocity, gain: [re, im]}]
//   snr_db          required, non-empty list
//   trials          integer >= 1 (default 200)
//   seed            integer
//   domain          "symbol" | "sample"; default "symbol" unless a cc method is listed
//   estimators      required, [{method: "2dfft"|"iter2dfft"|"cc"|"itercc", X}]
//   refine          {column, row, average}
//   long_range      {group_len, vcp_len, max_range, max_groups, vcp: "tail"|"following",
//                    interpolation: "nearest"|"bandlimited"}
//
// vcp_len defaults to ceil(tau_max / T_b) for max_range (or the farthest target).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "isac/bounds.hpp"
#include "isac/cc_long.hpp"
#include "isac/channel.hpp"
#include "isac/core.hpp"
#include "isac/random.hpp"
#include "isac/rd_short.hpp"
#include "isac/seqcode.hpp"
#include "isac/waveform.hpp"

namespace isac {

enum class Method { Fft2d, IterFft2d, Cc, IterCc };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Fft2d: return "2dfft";
    case Method::IterFft2d: return "iter2dfft";
    case Method::Cc: return "cc";
    case Method::IterCc: return "itercc";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "2dfft") return Method::Fft2d;
  if (s == "iter2dfft") return Method::IterFft2d;
  if (s == "cc") return Method::Cc;
  if (s == "itercc") return Method::IterCc;
  throw ConfigError("unknown estimator '" + s + "'");
}

inline bool is_long_range(Method m) { return m == Method::Cc || m == Method::IterCc; }

struct EstimatorSpec {
  Method method = Method::Fft2d;
  int x = 1;
};

enum class Domain { Symbol, Sample };

struct LongRangeConfig {
  std::size_t group_len = 128;
  std::optional<std::size_t> vcp_len;
  std::optional<double> max_range;
  std::size_t max_groups = 0;
  VcpSource vcp = VcpSource::FollowingSamples;
  DelayInterpolation interpolation = DelayInterpolation::Nearest;
};

struct Scenario {
  std::string name;
  WaveformConfig waveform;
  bool coded = false;
  bool zero_payload = false;
  std::uint64_t pilot_seed = 1;
  std::vector<Target> targets;
  std::vector<double> snr_db;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::optional<Domain> domain;
  std::vector<EstimatorSpec> estimators;
  RefineOptions refine;
  LongRangeConfig long_range;

  Domain effective_domain() const {
    if (domain) return *domain;
    for (const auto& e : estimators)
      if (is_long_range(e.method)) return Domain::Sample;
    return Domain::Symbol;
  }

  std::size_t vcp_len() const {
    if (long_range.vcp_len) return *long_range.vcp_len;
    double r = long_range.max_range.value_or(0.0);
    if (!long_range.max_range)
      for (const auto& t : targets) r = std::max(r, t.range);
    return static_cast<std::size_t>(std::ceil(2.0 * r / kSpeedOfLight / waveform.sample_interval() - 1e-9));
  }

  GroupingParams grouping() const {
    return {long_range.group_len, vcp_len(), long_range.max_groups, long_range.vcp};
  }

  void validate() const {
    waveform.validate();
    if (trials < 1) throw ConfigError("scenario: trials must be >= 1");
    if (snr_db.empty()) throw ConfigError("scenario: snr_db sweep is empty");
    if (targets.empty()) throw ConfigError("scenario: no targets");
    if (estimators.empty()) throw ConfigError("scenario: no estimators");
    for (const auto& e : estimators) {
      if (e.x < 1) throw ConfigError("scenario: X must be >= 1");
      if (is_long_range(e.method) && effective_domain() == Domain::Symbol)
        throw ConfigError("scenario: " + method_name(e.method) + " needs the sample-domain echo");
    }
    if (coded) {
      const auto n = waveform.n_data;
      if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("scenario: coded frames need a power-of-two N_d");
    }
    if (effective_domain() == Domain::Sample && long_range.group_len <= vcp_len())
      throw ConfigError("scenario: group_len must exceed the VCP length");
  }
};

namespace detail {
template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace detail

/// `check` = false skips validation; the af command only needs the waveform.
inline Scenario parse_scenario(const nlohmann::json& j, bool check = true) {
  try {
    Scenario s;
    detail::read_opt(j, "name", s.name);
    if (j.contains("waveform")) {
      const auto& w = j.at("waveform");
      auto& c = s.waveform;
      detail::read_opt(w, "delta_f", c.delta_f);
      detail::read_opt(w, "f_c", c.f_c);
      detail::read_opt(w, "n_sub", c.n_sub);
      detail::read_opt(w, "n_pilot", c.n_pilot);
      detail::read_opt(w, "m_pilot", c.m_pilot);
      detail::read_opt(w, "n_data", c.n_data);
      detail::read_opt(w, "m_data", c.m_data);
      detail::read_opt(w, "fft_size", c.fft_size);
      detail::read_opt(w, "cp_len", c.cp_len);
      detail::read_opt(w, "t_sym_includes_cp", c.t_sym_includes_cp);
      if (w.contains("modulation")) {
        const auto m = w.at("modulation").get<std::string>();
        if (m == "bpsk") c.modulation = Modulation::Bpsk;
        else if (m == "qpsk") c.modulation = Modulation::Qpsk;
        else throw ConfigError("scenario: unknown modulation '" + m + "'");
      }
    }
    detail::read_opt(j, "coded", s.coded);
    if (j.contains("payload")) {
      const auto p = j.at("payload").get<std::string>();
      if (p != "random" && p != "zeros") throw ConfigError("scenario: payload must be random or zeros");
      s.zero_payload = p == "zeros";
    }
    detail::read_opt(j, "pilot_seed", s.pilot_seed);
    if (check && !j.contains("targets")) throw ConfigError("scenario: missing targets");
    for (const auto& t : j.value("targets", nlohmann::json::array())) {
      Target tg;
      tg.range = t.at("range").get<double>();
      detail::read_opt(t, "velocity", tg.velocity);
      if (t.contains("gain")) {
        const auto g = t.at("gain").get<std::vector<double>>();
        if (g.size() != 2) throw ConfigError("scenario: gain must be [re, im]");
        tg.gain = {g[0], g[1]};
      }
      s.targets.push_back(tg);
    }
    if (check && !j.contains("snr_db")) throw ConfigError("scenario: missing snr_db");
    detail::read_opt(j, "snr_db", s.snr_db);
    detail::read_opt(j, "trials", s.trials);
    detail::read_opt(j, "seed", s.seed);
    if (j.contains("domain")) {
      const auto d = j.at("domain").get<std::string>();
      if (d == "symbol") s.domain = Domain::Symbol;
      else if (d == "sample") s.domain = Domain::Sample;
      else throw ConfigError("scenario: domain must be symbol or sample");
    }
    if (check && !j.contains("estimators")) throw ConfigError("scenario: missing estimators");
    for (const auto& e : j.value("estimators", nlohmann::json::array())) {
      EstimatorSpec spec{parse_method(e.at("method").get<std::string>()), 1};
      detail::read_opt(e, "X", spec.x);
      s.estimators.push_back(spec);
    }
    if (j.contains("refine")) {
      const auto& r = j.at("refine");
      detail::read_opt(r, "column", s.refine.column);
      detail::read_opt(r, "row", s.refine.row);
      detail::read_opt(r, "average", s.refine.average);
    }
    if (j.contains("long_range")) {
      const auto& l = j.at("long_range");
      auto& lr = s.long_range;
      detail::read_opt(l, "group_len", lr.group_len);
      if (l.contains("vcp_len")) lr.vcp_len = l.at("vcp_len").get<std::size_t>();
      if (l.contains("max_range")) lr.max_range = l.at("max_range").get<double>();
      detail::read_opt(l, "max_groups", lr.max_groups);
      if (l.contains("vcp")) {
        const auto v = l.at("vcp").get<std::string>();
        if (v == "tail") lr.vcp = VcpSource::GroupTail;
        else if (v == "following") lr.vcp = VcpSource::FollowingSamples;
        else throw ConfigError("scenario: vcp must be tail or following");
      }
      if (l.contains("interpolation")) {
        const auto v = l.at("interpolation").get<std::string>();
        if (v == "nearest") lr.interpolation = DelayInterpolation::Nearest;
        else if (v == "bandlimited") lr.interpolation = DelayInterpolation::BandLimited;
        else throw ConfigError("scenario: interpolation must be nearest or bandlimited");
      }
    }
    if (check) s.validate();
    else s.waveform.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

inline Scenario load_scenario(const std::string& path, bool check = true) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario(j, check);
}

/// One synthesized transmit frame and its echo.
struct Trial {
  SymbolGrid tx_grid;
  SampleStream tx_stream;
  SymbolGrid rx_grid;                   // symbol domain, or demodulated sample-domain echo
  std::optional<SampleStream> rx_stream;  // sample domain only
};

inline SymbolGrid scenario_frame(const Scenario& s, std::size_t trial) {
  const auto bits = s.zero_payload ? std::vector<std::uint8_t>(s.waveform.data_bits(), 0)
                                   : random_bits(s.waveform.data_bits(), trial_seed(s.seed, trial, 1));
  std::optional<GolayPair> pair;
  if (s.coded) pair = generate_golay(static_cast<int>(std::lround(std::log2(static_cast<double>(s.waveform.n_data)))));
  return build_frame(s.waveform, s.pilot_seed, bits, pair);
}

/// Builds trial `trial` at the given SNR (nullopt: noiseless). Noise seeds
/// depend on the trial only, so SNR points reuse the same realizations.
inline Trial make_trial(const Scenario& s, std::size_t trial, std::optional<double> snr_db) {
  Trial t;
  t.tx_grid = scenario_frame(s, trial);
  t.tx_stream = synthesize(t.tx_grid, s.waveform);
  const NoiseSpec noise{snr_db, trial_seed(s.seed, trial, 2)};
  if (s.effective_domain() == Domain::Symbol) {
    try {
      t.rx_grid = echo_symbol_domain(t.tx_grid, s.waveform, s.targets, noise);
    } catch (const ModelViolationError& e) {
      throw ConfigError(std::string(e.what()) + " (set domain to sample)");
    }
  } else {
    t.rx_stream = echo_sample_domain(t.tx_stream, s.targets, noise, s.long_range.interpolation);
    t.rx_grid = t.tx_grid;
    t.rx_grid.cells = demodulate(*t.rx_stream, s.waveform);
  }
  return t;
}

inline SensingEstimate run_estimator(const Scenario& s, const Trial& t, const EstimatorSpec& e) {
  const std::size_t n = s.targets.size();
  switch (e.method) {
    case Method::Fft2d:
      return estimate_2dfft(build_y(t.tx_grid, t.rx_grid, s.waveform), n);
    case Method::IterFft2d:
      return estimate_iterative_2dfft(build_y(t.tx_grid, t.rx_grid, s.waveform), e.x, n, s.refine);
    case Method::Cc:
    case Method::IterCc: {
      if (!t.rx_stream) throw ConfigError(method_name(e.method) + " needs the sample-domain echo");
      const auto [gt, gr] = group_with_vcp(t.tx_stream, *t.rx_stream, s.waveform, s.grouping());
      return estimate_cc(gt, gr, n, e.method == Method::Cc ? 1 : e.x);
    }
  }
  throw ConfigError("unknown estimator");
}

struct PairedError {
  double range = 0.0;
  double velocity = 0.0;
};

/// Assigns every truth the closest estimate in (R, V), distances measured in
/// bins of the estimator. Estimates are used at most once while any remain.
inline std::vector<PairedError> pair_errors(const std::vector<Target>& truth, const SensingEstimate& est) {
  const double rb = est.range_bin > 0.0 ? est.range_bin : 1.0;
  const double vb = est.velocity_bin > 0.0 ? est.velocity_bin : 1.0;
  std::vector<PairedError> out;
  std::vector<bool> used(est.targets.size(), false);
  for (const auto& t : truth) {
    if (est.targets.empty()) {
      out.push_back({std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()});
      continue;
    }
    if (std::all_of(used.begin(), used.end(), [](bool u) { return u; })) std::fill(used.begin(), used.end(), false);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < est.targets.size(); ++i) {
      if (used[i]) continue;
      const double dr = (est.targets[i].range - t.range) / rb, dv = (est.targets[i].velocity - t.velocity) / vb;
      const double d = dr * dr + dv * dv;
      if (d < best_d) { best_d = d; best = i; }
    }
    used[best] = true;
    out.push_back({est.targets[best].range - t.range, est.targets[best].velocity - t.velocity});
  }
  return out;
}

struct SweepRow {
  double snr_db = 0.0;
  std::string estimator;
  int x = 1;
  double rmse_r = 0.0;
  double rmse_v = 0.0;
  std::optional<double> crlb_r;  // sqrt of the bound, m
  std::optional<double> crlb_v;  // m/s
  std::size_t trials = 0;
  double seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  unsigned workers = 1;
  bool timing = false;  // fill the seconds column with measured estimator time
};

/// Closed-form bounds for the grouped long-range model at one SNR point.
inline CrlbReport scenario_crlb(const Scenario& s, double snr_db) {
  const auto& w = s.waveform;
  const std::size_t body = w.n_symbols() * w.fft_size;
  std::size_t groups = body / s.long_range.group_len;
  if (s.long_range.max_groups > 0) groups = std::min(groups, s.long_range.max_groups);
  CrlbParams p;
  p.h = s.targets.front().gain;
  p.snr = from_db10(snr_db);
  p.group_len = s.long_range.group_len;
  p.vcp_len = s.vcp_len();
  p.groups = groups;
  p.n_sub = w.n_sub;
  p.t_b = w.sample_interval();
  p.f_c = w.f_c;
  p.coherent_gain = coherent_gain(p.group_len, s.coded);
  return crlb(p);
}

namespace detail {
struct TrialOutcome {
  std::vector<std::vector<PairedError>> errors;  // per estimator
  std::vector<double> seconds;
};

inline TrialOutcome run_trial(const Scenario& s, std::size_t trial, double snr_db, bool timing) {
  const auto t = make_trial(s, trial, snr_db);
  TrialOutcome out;
  for (const auto& e : s.estimators) {
    const auto start = std::chrono::steady_clock::now();
    const auto est = run_estimator(s, t, e);
    const auto stop = std::chrono::steady_clock::now();
    out.errors.push_back(pair_errors(s.targets, est));
    out.seconds.push_back(timing ? std::chrono::duration<double>(stop - start).count() : 0.0);
  }
  return out;
}
}  // namespace detail

/// Trials are distributed over workers; results are stored by trial index and
/// reduced in index order, so the output does not depend on the worker count.
inline SweepResult run_sweep(const Scenario& s, const SweepOptions& opt = {}) {
  s.validate();
  SweepResult result;
  const unsigned workers = std::max(1U, opt.workers);
  for (double snr : s.snr_db) {
    std::vector<detail::TrialOutcome> outcomes(s.trials);
    std::vector<std::exception_ptr> failures(workers);
    auto body = [&](unsigned w) {
      try {
        for (std::size_t k = w; k < s.trials; k += workers) outcomes[k] = detail::run_trial(s, k, snr, opt.timing);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    };
    if (workers == 1) {
      body(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
      for (auto& th : pool) th.join();
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);

    for (std::size_t e = 0; e < s.estimators.size(); ++e) {
      double sr = 0.0, sv = 0.0, sec = 0.0;
      std::size_t count = 0;
      for (const auto& o : outcomes) {
        for (const auto& pe : o.errors[e]) {
          sr += pe.range * pe.range;
          sv += pe.velocity * pe.velocity;
          ++count;
        }
        sec += o.seconds[e];
      }
      SweepRow row;
      row.snr_db = snr;
      row.estimator = method_name(s.estimators[e].method);
      row.x = s.estimators[e].method == Method::Fft2d || s.estimators[e].method == Method::Cc ? 1 : s.estimators[e].x;
      row.rmse_r = std::sqrt(sr / static_cast<double>(count));
      row.rmse_v = std::sqrt(sv / static_cast<double>(count));
      if (is_long_range(s.estimators[e].method)) {
        const auto b = scenario_crlb(s, snr);
        row.crlb_r = std::sqrt(b.crlb_r);
        row.crlb_v = std::sqrt(b.crlb_v);
      }
      row.trials = s.trials;
      row.seconds = sec;
      result.rows.push_back(row);
    }
  }
  return result;
}

inline constexpr const char* kSweepCsvHeader = "snr_db,estimator,X,rmse_r_m,rmse_v_mps,crlb_r_m,crlb_v_mps,trials,seconds";

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
}  // namespace detail

/// Fixed column order; empty CRLB cells where the long-range model does not apply.
inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << kSweepCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << detail::fmt(row.snr_db) << ',' << row.estimator << ',' << row.x << ',' << detail::fmt(row.rmse_r) << ','
       << detail::fmt(row.rmse_v) << ',' << (row.crlb_r ? detail::fmt(*row.crlb_r) : "") << ','
       << (row.crlb_v ? detail::fmt(*row.crlb_v) : "") << ',' << row.trials << ',' << detail::fmt(row.seconds)
       << '\n';
  }
}

inline nlohmann::json sweep_json(const SweepResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"snr_db", row.snr_db},
                    {"estimator", row.estimator},
                    {"X", row.x},
                    {"rmse_r_m", row.rmse_r},
                    {"rmse_v_mps", row.rmse_v},
                    {"crlb_r_m", row.crlb_r ? nlohmann::json(*row.crlb_r) : nlohmann::json(nullptr)},
                    {"crlb_v_mps", row.crlb_v ? nlohmann::json(*row.crlb_v) : nlohmann::json(nullptr)},
                    {"trials", row.trials},
                    {"seconds", row.seconds}});
  }
  return rows;
}

inline nlohmann::json estimate_json(const SensingEstimate& est, const std::string& method) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : est.targets)
    targets.push_back({{"range_m", t.range},
                       {"velocity_mps", t.velocity},
                       {"range_peaks", t.range_peaks},
                       {"velocity_peaks", t.velocity_peaks}});
  return {{"method", method},
          {"X", est.iterations},
          {"range_bin_m", est.range_bin},
          {"velocity_bin_mps", est.velocity_bin},
          {"targets", targets}};
}

}  // namespace isac
