// Two targets 0.2 m and 0.5 m/s apart share one coarse cell of the reference
// frame; the strongest response is refined by the iterative 2-D FFT.
#include <cstdio>

#include "isac/isac.hpp"

int main() {
  const auto cfg = isac::reference_config();
  const std::vector<isac::Target> targets{{115.2, 15.0, {1.0, 0.0}}, {115.4, 15.5, {1.0, 0.0}}};

  const auto bits = isac::random_bits(cfg.data_bits(), 7);
  const auto tx = isac::build_frame(cfg, 1, bits);
  const auto rx = isac::echo_symbol_domain(tx, cfg, targets, {20.0, 11});
  const auto ch = isac::build_y(tx, rx, cfg);

  const auto plain = isac::estimate_2dfft(ch, 1);
  const auto fine = isac::estimate_iterative_2dfft(ch, 2, 1);
  std::printf("bins: %.4f m, %.4f m/s (X=2: %.4f m/s)\n", plain.range_bin, plain.velocity_bin, fine.velocity_bin);
  std::printf("2dfft     %8.3f m %7.3f m/s\niter2dfft %8.3f m %7.3f m/s\n", plain.targets[0].range,
              plain.targets[0].velocity, fine.targets[0].range, fine.targets[0].velocity);
}
