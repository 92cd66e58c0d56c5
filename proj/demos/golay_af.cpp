// Zero-Doppler ambiguity cut of a Golay-coded frame against random QPSK.
#include <cstdio>

#include "isac/isac.hpp"

int main() {
  isac::WaveformConfig cfg;
  cfg.n_sub = cfg.n_data = cfg.fft_size = 32;
  cfg.n_pilot = cfg.m_pilot = 0;
  cfg.m_data = 10;
  cfg.cp_len = 0;

  auto coded_cfg = cfg;
  coded_cfg.modulation = isac::Modulation::Bpsk;
  const auto pair = isac::generate_golay(5);
  const auto coded = isac::synthesize(
      isac::build_frame(coded_cfg, 1, std::vector<std::uint8_t>(coded_cfg.data_bits(), 0), pair), coded_cfg);
  const auto plain = isac::synthesize(isac::build_frame(cfg, 1, isac::random_bits(cfg.data_bits(), 9)), cfg);

  const auto delays = isac::delay_grid(31);
  const std::vector<double> dopplers{0.0};
  const auto a = isac::ambiguity(coded, delays, dopplers);
  const auto b = isac::ambiguity(plain, delays, dopplers);
  std::printf("lag  coded   random\n");
  for (std::size_t i = 0; i < delays.size(); ++i)
    std::printf("%3d  %.4f  %.4f\n", delays[i], a.magnitudes(i, 0), b.magnitudes(i, 0));
  std::printf("cut sidelobe: coded %.1f dB, random %.1f dB\n", isac::sidelobe_metrics(a).cut_sidelobe_db,
              isac::sidelobe_metrics(b).cut_sidelobe_db);
}
