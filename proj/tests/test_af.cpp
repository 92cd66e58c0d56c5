#include <gtest/gtest.h>

#include <sstream>

#include "isac/af.hpp"

using namespace isac;

namespace {

WaveformConfig af_config() {
  WaveformConfig c;
  c.n_sub = c.n_pilot = c.n_data = 32;
  c.m_pilot = 0;
  c.m_data = 10;
  c.fft_size = 32;
  c.cp_len = 0;
  return c;
}

SampleStream coded_frame() {
  auto c = af_config();
  c.modulation = Modulation::Bpsk;
  return synthesize(build_frame(c, 1, std::vector<std::uint8_t>(c.data_bits(), 0), generate_golay(5)), c);
}

SampleStream random_frame(std::uint64_t seed) {
  const auto c = af_config();
  return synthesize(build_frame(c, seed, random_bits(c.data_bits(), seed)), c);
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(Ambiguity, NormalisedAtOrigin) {
  const auto s = random_frame(1);
  const auto surf = ambiguity(s, delay_grid(20), doppler_grid(6, default_doppler_step(s)));
  EXPECT_DOUBLE_EQ(surf.magnitudes(20, 6), 1.0);
  double peak = 0.0;
  for (double v : surf.magnitudes.data()) peak = std::max(peak, v);
  EXPECT_EQ(peak, 1.0);
}

TEST(Ambiguity, HermitianSymmetry) {
  const auto s = random_frame(2);
  const auto surf = ambiguity(s, delay_grid(15), doppler_grid(5, 700.0));
  for (std::size_t r = 0; r < 31; ++r)
    for (std::size_t c = 0; c < 11; ++c) EXPECT_NEAR(surf.magnitudes(r, c), surf.magnitudes(30 - r, 10 - c), 1e-9);
}

TEST(Ambiguity, VolumeInvariance) {
  // full delay support and a complete Doppler period give the volume property
  auto vol = [](const SampleStream& s) {
    const long n = static_cast<long>(s.samples.size());
    std::vector<double> f;
    for (long k = 0; k < n; ++k) f.push_back(static_cast<double>(k) / (static_cast<double>(n) * s.t_b));
    const auto surf = ambiguity(s, delay_grid(static_cast<int>(n - 1)), f);
    double v = 0.0;
    for (double m : surf.magnitudes.data()) v += m * m;
    return v;
  };
  auto coded = coded_frame();
  auto plain = random_frame(3);
  const double ec = energy(coded.samples), ep = energy(plain.samples);
  for (auto& x : plain.samples) x *= std::sqrt(ec / ep);
  EXPECT_NEAR(vol(coded) / vol(plain), 1.0, 1e-6);
  EXPECT_NEAR(vol(coded), static_cast<double>(coded.samples.size()), 1e-6 * vol(coded));
}

TEST(Ambiguity, OutOfSupportRowIsZero) {
  std::vector<cplx> s(8, cplx{1.0});
  const auto surf = ambiguity(s, 1e-6, {-9, 0, 9}, {0.0});
  EXPECT_EQ(surf.magnitudes(0, 0), 0.0);
  EXPECT_EQ(surf.magnitudes(2, 0), 0.0);
}

TEST(Sidelobes, ThumbtackSentinel) {
  AmbiguitySurface s{RMatrix(5, 5), delay_grid(2), doppler_grid(2, 1.0), 1.0, 1.0};
  s.magnitudes(2, 2) = 1.0;
  const auto m = sidelobe_metrics(s);
  EXPECT_EQ(m.peak_sidelobe_db, kNoSidelobe);
  EXPECT_EQ(m.cut_sidelobe_db, kNoSidelobe);
}

TEST(Sidelobes, RectangularPulseTriangle) {
  const int p = 64;
  std::vector<cplx> s(p, cplx{1.0});
  const double tb = 1e-6;
  const auto surf = ambiguity(s, tb, delay_grid(p - 1), {0.0});
  const auto m = sidelobe_metrics(surf);
  const double analytic = -1.0 / (p * tb);
  EXPECT_NEAR(m.decay_slope / analytic, 1.0, 0.05);
}

TEST(Sidelobes, AllZeroIsDegenerate) {
  AmbiguitySurface s{RMatrix(3, 3), delay_grid(1), doppler_grid(1, 1.0), 1.0, 1.0};
  EXPECT_THROW(sidelobe_metrics(s), DegenerateInputError);
}

TEST(Sidelobes, CodedFrameBeatsRandomFrames) {
  const auto coded = coded_frame();
  const auto dop = doppler_grid(4, default_doppler_step(coded));
  const double coded_psl = sidelobe_metrics(ambiguity(coded, delay_grid(31), dop)).cut_sidelobe_db;
  std::vector<double> plain;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    plain.push_back(sidelobe_metrics(ambiguity(random_frame(seed), delay_grid(31), dop)).cut_sidelobe_db);
  EXPECT_LT(coded_psl, median(plain));
}

TEST(SurfaceCsv, HeaderAndFloor) {
  AmbiguitySurface s{RMatrix(3, 1), delay_grid(1), {0.0}, 2e-6, 0.0};
  s.magnitudes(1, 0) = 1.0;
  std::ostringstream os;
  write_surface_csv(os, s, -60.0);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "delay_s,doppler_hz,magnitude");
  std::getline(in, line);
  EXPECT_EQ(line, "-2e-06,0,0.001");
  std::getline(in, line);
  EXPECT_EQ(line, "0,0,1");
}
