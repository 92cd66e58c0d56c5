// Sample-domain echo at 600 m, grouped cross-correlation with a virtual CP.
#include <cstdio>

#include "isac/isac.hpp"

int main() {
  auto cfg = isac::reference_config();
  cfg.cp_len = 0;
  const std::vector<isac::Target> targets{{600.0, 25.0, {1.0, 0.0}}};

  const auto tx = isac::synthesize(isac::build_frame(cfg, 1, isac::random_bits(cfg.data_bits(), 3)), cfg);
  const auto rx = isac::echo_sample_domain(tx, targets, {30.0, 5});

  const std::size_t vcp = static_cast<std::size_t>(std::ceil(targets[0].delay() / cfg.sample_interval()));
  const auto [gt, gr] = isac::group_with_vcp(tx, rx, cfg, {128, vcp, 48, isac::VcpSource::FollowingSamples});
  std::printf("groups %zu x %zu, VCP %zu samples\n", gt.n_groups(), gt.group_len(), vcp);
  for (int x : {1, 2}) {
    const auto est = isac::estimate_cc(gt, gr, 1, x);
    std::printf("X=%d  R %.3f m  V %.4f m/s  (velocity bin %.4f m/s)\n", x, est.targets[0].range,
                est.targets[0].velocity, est.velocity_bin);
  }
}
