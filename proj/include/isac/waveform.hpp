#pragma once

// Pilot + data OFDM frame construction, CP-OFDM synthesis/demodulation and
// the interleaved I/Q file format.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isac/core.hpp"
#include "isac/fft.hpp"
#include "isac/seqcode.hpp"

namespace isac {

enum class Modulation { Bpsk, Qpsk };

inline int bits_per_symbol(Modulation m) { return m == Modulation::Bpsk ? 1 : 2; }

struct WaveformConfig {
  double delta_f = 15e3;      // subcarrier spacing (Hz), shared by pilot and data
  double f_c = 24e9;          // carrier (Hz)
  std::size_t n_sub = 256;    // N: subcarriers mapped into the synthesis transform
  std::size_t n_pilot = 256;  // N_p
  std::size_t m_pilot = 2;    // M_p
  std::size_t n_data = 256;   // N_d
  std::size_t m_data = 12;    // M_d
  std::size_t fft_size = 512; // N': samples per symbol body
  std::size_t cp_len = 36;
  bool t_sym_includes_cp = true;
  Modulation modulation = Modulation::Qpsk;

  std::size_t n_symbols() const { return m_pilot + m_data; }
  double sample_interval() const { return 1.0 / (static_cast<double>(fft_size) * delta_f); }
  /// Time between the starts of consecutive symbols as used by the Doppler model.
  double symbol_duration() const {
    const auto len = fft_size + (t_sym_includes_cp ? cp_len : 0);
    return static_cast<double>(len) * sample_interval();
  }
  double cp_duration() const { return static_cast<double>(cp_len) * sample_interval(); }
  std::size_t samples_per_symbol() const { return fft_size + cp_len; }
  std::size_t frame_samples() const { return n_symbols() * samples_per_symbol(); }
  std::size_t data_bits() const {
    return n_data * m_data * static_cast<std::size_t>(bits_per_symbol(modulation));
  }

  void validate() const {
    if (!(delta_f > 0.0) || !(f_c > 0.0)) throw ConfigError("waveform: delta_f and f_c must be positive");
    if (n_sub == 0) throw ConfigError("waveform: no subcarriers");
    if (n_pilot > n_sub || n_data > n_sub) throw ConfigError("waveform: pilot/data bands exceed N");
    if (n_symbols() == 0) throw ConfigError("waveform: frame has no symbols");
    if (m_pilot > 0 && n_pilot == 0) throw ConfigError("waveform: pilot symbols without pilot subcarriers");
    if (m_data > 0 && n_data == 0) throw ConfigError("waveform: data symbols without data subcarriers");
  }
};

/// Reference waveform: 15 kHz, 24 GHz, 256 subcarriers, 14 symbols, N' = 512.
inline WaveformConfig reference_config() { return WaveformConfig{}; }

enum class CellKind : std::uint8_t { Inactive, Pilot, Data };

/// Pilot cells occupy subcarriers [0, N_p) of symbols [0, M_p); data cells
/// occupy subcarriers [0, N_d) of symbols [M_p, M).
struct GridLayout {
  std::size_t n_pilot = 0, m_pilot = 0, n_data = 0, m_data = 0;

  CellKind kind(std::size_t n, std::size_t m) const {
    if (m < m_pilot) return n < n_pilot ? CellKind::Pilot : CellKind::Inactive;
    if (m < m_pilot + m_data) return n < n_data ? CellKind::Data : CellKind::Inactive;
    return CellKind::Inactive;
  }
};

struct SymbolGrid {
  CMatrix cells;  // N x M
  GridLayout layout;
  std::optional<std::vector<double>> chips;  // present when the data block is phase-coded

  std::size_t n_sub() const { return cells.rows(); }
  std::size_t n_symbols() const { return cells.cols(); }

  CMatrix data_block() const {
    CMatrix d(layout.n_data, layout.m_data);
    for (std::size_t n = 0; n < layout.n_data; ++n)
      for (std::size_t m = 0; m < layout.m_data; ++m) d(n, m) = cells(n, layout.m_pilot + m);
    return d;
  }
};

inline cplx map_symbol(Modulation mod, const std::uint8_t* bits) {
  if (mod == Modulation::Bpsk) return {bits[0] ? -1.0 : 1.0, 0.0};
  const double s = 1.0 / std::sqrt(2.0);
  return {bits[0] ? -s : s, bits[1] ? -s : s};
}

inline std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<std::uint8_t> bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(eng() >> 63);
  return bits;
}

/// Builds one frame. Data bits fill the data block column by column
/// (subcarrier index fastest). Pilots are seeded unit-modulus QPSK.
inline SymbolGrid build_frame(const WaveformConfig& cfg, std::uint64_t pilot_seed,
                              const std::vector<std::uint8_t>& data_bits,
                              const std::optional<GolayPair>& coding = std::nullopt) {
  cfg.validate();
  if (data_bits.size() != cfg.data_bits())
    throw ParameterError("build_frame: expected " + std::to_string(cfg.data_bits()) + " data bits, got " +
                         std::to_string(data_bits.size()));
  SymbolGrid grid{CMatrix(cfg.n_sub, cfg.n_symbols()), {cfg.n_pilot, cfg.m_pilot, cfg.n_data, cfg.m_data}, {}};

  std::mt19937_64 pilot_eng(pilot_seed);
  for (std::size_t m = 0; m < cfg.m_pilot; ++m)
    for (std::size_t n = 0; n < cfg.n_pilot; ++n) {
      const auto word = pilot_eng();
      const std::uint8_t b[2] = {static_cast<std::uint8_t>(word >> 63), static_cast<std::uint8_t>((word >> 62) & 1U)};
      grid.cells(n, m) = map_symbol(Modulation::Qpsk, b);
    }

  const auto bps = static_cast<std::size_t>(bits_per_symbol(cfg.modulation));
  CMatrix data(cfg.n_data, cfg.m_data);
  std::size_t pos = 0;
  for (std::size_t m = 0; m < cfg.m_data; ++m)
    for (std::size_t n = 0; n < cfg.n_data; ++n, pos += bps) data(n, m) = map_symbol(cfg.modulation, &data_bits[pos]);

  if (coding) {
    auto coded = phase_code(data, *coding);
    data = std::move(coded.symbols);
    grid.chips = std::move(coded.chips);
  }
  for (std::size_t m = 0; m < cfg.m_data; ++m)
    for (std::size_t n = 0; n < cfg.n_data; ++n) grid.cells(n, cfg.m_pilot + m) = data(n, m);
  return grid;
}

/// Hard-decision recovery of the data bits (decoding the phase code first).
inline std::vector<std::uint8_t> demap_data(const SymbolGrid& grid, Modulation mod) {
  CMatrix data = grid.data_block();
  if (grid.chips) data = phase_decode(CodedGrid{data, grid.chips});
  std::vector<std::uint8_t> bits;
  bits.reserve(data.size() * static_cast<std::size_t>(bits_per_symbol(mod)));
  for (std::size_t m = 0; m < data.cols(); ++m)
    for (std::size_t n = 0; n < data.rows(); ++n) {
      const auto v = data(n, m);
      bits.push_back(v.real() < 0.0 ? 1 : 0);
      if (mod == Modulation::Qpsk) bits.push_back(v.imag() < 0.0 ? 1 : 0);
    }
  return bits;
}

/// Complex baseband samples at interval T_b. `symbol_starts` marks the first
/// sample (CP included) of each OFDM symbol.
struct SampleStream {
  std::vector<cplx> samples;
  double t0 = 0.0;
  double t_b = 0.0;
  double f_c = 0.0;
  std::size_t cp_len = 0;
  std::size_t fft_size = 0;
  std::vector<std::size_t> symbol_starts;

  bool operator==(const SampleStream&) const = default;
};

/// Per symbol: N'-point inverse transform of the column (bins >= N zero),
/// scaled by 1/N', with the last cp_len samples prepended.
inline SampleStream synthesize(const SymbolGrid& grid, const WaveformConfig& cfg) {
  cfg.validate();
  if (cfg.fft_size < cfg.n_sub) throw ConfigError("synthesize: N' smaller than N");
  if (grid.n_sub() != cfg.n_sub || grid.n_symbols() != cfg.n_symbols())
    throw DimensionError("synthesize: grid does not match configuration");
  SampleStream out;
  out.t_b = cfg.sample_interval();
  out.f_c = cfg.f_c;
  out.cp_len = cfg.cp_len;
  out.fft_size = cfg.fft_size;
  out.samples.reserve(cfg.frame_samples());
  const double scale = 1.0 / static_cast<double>(cfg.fft_size);
  std::vector<cplx> body(cfg.fft_size);
  for (std::size_t m = 0; m < cfg.n_symbols(); ++m) {
    std::fill(body.begin(), body.end(), cplx{});
    for (std::size_t n = 0; n < cfg.n_sub; ++n) body[n] = grid.cells(n, m);
    fft::inverse(body);
    for (auto& v : body) v *= scale;
    out.symbol_starts.push_back(out.samples.size());
    out.samples.insert(out.samples.end(), body.end() - static_cast<std::ptrdiff_t>(cfg.cp_len), body.end());
    out.samples.insert(out.samples.end(), body.begin(), body.end());
  }
  return out;
}

/// Concatenated symbol bodies with every CP removed (M * N' samples).
inline std::vector<cplx> strip_cp(const SampleStream& s, const WaveformConfig& cfg) {
  if (s.samples.size() < cfg.frame_samples()) throw DimensionError("strip_cp: stream shorter than one frame");
  std::vector<cplx> out;
  out.reserve(cfg.n_symbols() * cfg.fft_size);
  for (std::size_t m = 0; m < cfg.n_symbols(); ++m) {
    const auto begin = s.samples.begin() + static_cast<std::ptrdiff_t>(m * cfg.samples_per_symbol() + cfg.cp_len);
    out.insert(out.end(), begin, begin + static_cast<std::ptrdiff_t>(cfg.fft_size));
  }
  return out;
}

/// Drops each CP and applies an unscaled forward transform; inverse of synthesize.
inline CMatrix demodulate(const SampleStream& s, const WaveformConfig& cfg) {
  const auto bodies = strip_cp(s, cfg);
  CMatrix grid(cfg.n_sub, cfg.n_symbols());
  std::vector<cplx> body(cfg.fft_size);
  for (std::size_t m = 0; m < cfg.n_symbols(); ++m) {
    std::copy_n(bodies.begin() + static_cast<std::ptrdiff_t>(m * cfg.fft_size), cfg.fft_size, body.begin());
    fft::forward(body);
    for (std::size_t n = 0; n < cfg.n_sub; ++n) grid(n, m) = body[n];
  }
  return grid;
}

/// Peak-to-average power ratio in dB.
inline double papr(std::span<const cplx> samples) {
  if (samples.empty()) throw ParameterError("papr: empty stream");
  double peak = 0.0, sum = 0.0;
  for (const auto& v : samples) {
    const double p = std::norm(v);
    peak = std::max(peak, p);
    sum += p;
  }
  if (sum == 0.0) throw DegenerateInputError("papr: all-zero stream");
  return db10(peak / (sum / static_cast<double>(samples.size())));
}

inline double papr(const SampleStream& s) { return papr(std::span<const cplx>(s.samples)); }

// ---------------------------------------------------------------------------
// I/Q file: text header terminated by a line "end", followed by interleaved
// little-endian float64 I/Q pairs.
//
//   ISACIQ 1
//   t_b <seconds>
//   f_c <hertz>
//   t0 <seconds>
//   cp_len <samples>
//   fft_size <samples>
//   samples <count>
//   markers <count> <i_0> ... <i_{count-1}>
//   end

namespace detail {
inline void put_le(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  os.write(reinterpret_cast<const char*>(&u), sizeof u);
}
inline double get_le(std::istream& is) {
  std::uint64_t u = 0;
  if (!is.read(reinterpret_cast<char*>(&u), sizeof u)) throw ParameterError("iq: truncated sample payload");
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double v;
  std::memcpy(&v, &u, sizeof v);
  return v;
}
}  // namespace detail

inline void write_iq(std::ostream& os, const SampleStream& s) {
  os << "ISACIQ 1\n" << std::setprecision(17);
  os << "t_b " << s.t_b << "\nf_c " << s.f_c << "\nt0 " << s.t0 << "\n";
  os << "cp_len " << s.cp_len << "\nfft_size " << s.fft_size << "\nsamples " << s.samples.size() << "\n";
  os << "markers " << s.symbol_starts.size();
  for (auto i : s.symbol_starts) os << ' ' << i;
  os << "\nend\n";
  for (const auto& v : s.samples) {
    detail::put_le(os, v.real());
    detail::put_le(os, v.imag());
  }
}

inline SampleStream read_iq(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "ISACIQ 1") throw ParameterError("iq: missing ISACIQ 1 header");
  SampleStream s;
  std::size_t count = 0;
  bool have_count = false;
  while (std::getline(is, line)) {
    if (line == "end") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "t_b") ls >> s.t_b;
    else if (key == "f_c") ls >> s.f_c;
    else if (key == "t0") ls >> s.t0;
    else if (key == "cp_len") ls >> s.cp_len;
    else if (key == "fft_size") ls >> s.fft_size;
    else if (key == "samples") { ls >> count; have_count = true; }
    else if (key == "markers") {
      std::size_t k = 0;
      ls >> k;
      s.symbol_starts.resize(k);
      for (auto& v : s.symbol_starts) ls >> v;
    } else throw ParameterError("iq: unknown header key '" + key + "'");
    if (ls.fail()) throw ParameterError("iq: malformed header line '" + line + "'");
  }
  if (line != "end" || !have_count) throw ParameterError("iq: incomplete header");
  s.samples.resize(count);
  for (auto& v : s.samples) {
    const double re = detail::get_le(is);
    v = {re, detail::get_le(is)};
  }
  return s;
}

inline void save_iq(const std::string& path, const SampleStream& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParameterError("iq: cannot open '" + path + "' for writing");
  write_iq(os, s);
}

inline SampleStream load_iq(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParameterError("iq: cannot open '" + path + "'");
  return read_iq(is);
}

}  // namespace isac
