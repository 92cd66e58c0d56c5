#include <gtest/gtest.h>

#include "isac/bounds.hpp"
#include "isac/random.hpp"
#include "oracles.hpp"

using namespace isac;

namespace {

CrlbParams base() {
  CrlbParams p;
  p.h = {0.9, 0.2};
  p.snr = 10.0;
  p.group_len = 128;
  p.vcp_len = 31;
  p.groups = 48;
  p.n_sub = 256;
  p.t_b = 1.0 / (512 * 15e3);
  p.f_c = 24e9;
  return p;
}

CMatrix white_groups(std::size_t groups, std::size_t n, std::uint64_t seed) {
  ComplexGaussian g(seed);
  CMatrix m(groups, n);
  for (auto& v : m.data()) v = g(1.0);
  return m;
}

}  // namespace

TEST(Crlb, DoublingSnrHalvesEveryBound) {
  const auto a = crlb(base());
  auto p = base();
  p.snr *= 2;
  const auto b = crlb(p);
  EXPECT_DOUBLE_EQ(b.crlb_eps * 2, a.crlb_eps);
  EXPECT_DOUBLE_EQ(b.crlb_ups * 2, a.crlb_ups);
  EXPECT_DOUBLE_EQ(b.crlb_r * 2, a.crlb_r);
  EXPECT_DOUBLE_EQ(b.crlb_v * 2, a.crlb_v);
}

TEST(Crlb, CodingGain) {
  EXPECT_NEAR(coherent_gain(128, true), 21.072, 1e-3);
  EXPECT_EQ(coherent_gain(128, false), 1.0);
  EXPECT_NEAR(coherent_gain(128, true, 2.0), 70.0, 1e-12);
  auto p = base();
  const auto plain = crlb(p);
  p.coherent_gain = coherent_gain(128, true);
  const auto coded = crlb(p);
  EXPECT_NEAR(plain.crlb_r / coded.crlb_r, 10 * std::log10(128.0), 1e-9);
  EXPECT_NEAR(plain.crlb_v / coded.crlb_v, 10 * std::log10(128.0), 1e-9);
}

TEST(Crlb, RangeAndVelocityFollowFromDelayAndDoppler) {
  const auto p = base();
  const auto r = crlb(p);
  const double cr = kSpeedOfLight * p.t_b / 2.0, cv = kSpeedOfLight / (2.0 * p.f_c * p.t_b);
  EXPECT_NEAR(r.crlb_r / (cr * cr * r.crlb_eps), 1.0, 1e-12);
  EXPECT_NEAR(r.crlb_v / (cv * cv * r.crlb_ups), 1.0, 1e-12);
  EXPECT_GT(r.crlb_eps, 0.0);
  EXPECT_GT(r.crlb_ups, 0.0);
}

TEST(Crlb, MonotoneDecreasing) {
  const double ref = crlb(base()).crlb_r;
  auto p = base();
  p.coherent_gain = 2.0;
  EXPECT_LT(crlb(p).crlb_r, ref);
  p = base();
  p.snr = 11.0;
  EXPECT_LT(crlb(p).crlb_r, ref);
  p = base();
  p.n_sub = 257;
  EXPECT_LT(crlb(p).crlb_r, ref);
  p = base();
  p.h *= 1.01;
  EXPECT_LT(crlb(p).crlb_r, ref);
}

TEST(Crlb, Errors) {
  auto p = base();
  p.groups = 1;
  EXPECT_THROW(crlb(p), ParameterError);
  p = base();
  p.group_len = 10;
  p.vcp_len = 30;
  EXPECT_THROW(crlb(p), ParameterError);
}

TEST(LogLikelihood, MaximumAtTruth) {
  const auto tx = white_groups(4, 32, 1);
  const DelayDoppler truth{3.3, 0.002};
  const LikelihoodParams p{{0.8, 0.3}, 0.1, coherent_gain(32, true), 4};
  const auto rx = echo_model(truth, tx, p.h);
  const double at_truth = log_likelihood(truth, tx, rx, p);
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) {
      if (a == 0 && b == 0) continue;
      EXPECT_LT(log_likelihood({truth.eps + 0.05 * a, truth.ups + 1e-4 * b}, tx, rx, p), at_truth);
    }
}

TEST(LogLikelihood, ResidualIsQuadratic) {
  const auto tx = white_groups(4, 32, 2);
  const auto rx = white_groups(4, 32, 3);
  const DelayDoppler th{1.7, -0.001};
  LikelihoodParams p{{0.5, -0.5}, 0.2, 3.0, 4};
  const double constant = log_likelihood(th, tx, echo_model(th, tx, p.h), p);
  const double base_res = log_likelihood(th, tx, rx, p) - constant;
  CMatrix rx2 = rx;
  for (auto& v : rx2.data()) v *= 2.0;
  p.h *= 2.0;
  const double doubled = log_likelihood(th, tx, rx2, p) - constant;
  EXPECT_NEAR(doubled / base_res, 4.0, 1e-12);
}

TEST(LogLikelihood, Errors) {
  const auto tx = white_groups(4, 32, 4);
  EXPECT_THROW(log_likelihood({0, 0}, tx, tx, {{1, 0}, 0.0, 1.0, 4}), ParameterError);
  EXPECT_THROW(log_likelihood({0, 0}, tx, tx, {{1, 0}, 1.0, 1.0, 32}), ParameterError);
  EXPECT_THROW(log_likelihood({0, 0}, tx, white_groups(3, 32, 5), {{1, 0}, 1.0, 1.0, 4}), DimensionError);
}

TEST(Fisher, NumericHessianMatchesElements) {
  const auto tx = white_groups(4, 32, 6);
  const DelayDoppler truth{2.4, 0.0015};
  const LikelihoodParams p{{0.7, 0.4}, 0.05, coherent_gain(32, true), 4};
  const auto rx = echo_model(truth, tx, p.h);
  auto f = [&](double e, double u) { return log_likelihood({e, u}, tx, rx, p); };
  const auto h = oracle::hessian(f, {truth.eps, truth.ups}, {1e-4, 1e-4});
  const auto j = fisher_information(truth, tx, p);
  EXPECT_NEAR(-h[0][0] / j[0][0], 1.0, 0.05);
  EXPECT_NEAR(-h[1][1] / j[1][1], 1.0, 0.05);
  EXPECT_NEAR(-h[0][1], j[0][1], 0.05 * std::sqrt(j[0][0] * j[1][1]));
  EXPECT_EQ(j[0][1], j[1][0]);
}
