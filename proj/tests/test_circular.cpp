#include "mssf/circular.hpp"
#include "mssf/errors.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <numbers>

using namespace mssf;
using mssf::testing::integrate;

constexpr double kPi = std::numbers::pi;

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(2 * kPi + 0.25), 0.25, 1e-12);
  EXPECT_NEAR(wrap_angle(-0.5 - 4 * kPi), -0.5, 1e-12);
  EXPECT_FLOAT_EQ(wrap_angle(7.0f), 7.0f - 2.0f * std::numbers::pi_v<float>);
}

TEST(Consensus, PersistenceOnly) {
  const std::array<double, 1> kappas{20.0};
  const auto c = consensus_vector<double>(0.7, {}, kappas);
  EXPECT_NEAR(c.mean_direction, 0.7, 1e-15);
  EXPECT_NEAR(c.concentration, 20.0, 1e-12);
}

TEST(Consensus, CancellingWeightsGiveZeroConcentration) {
  const std::array<double, 2> kappas{5.0, 5.0};
  const std::array<double, 1> targets{kPi};
  const auto c = consensus_vector<double>(0.0, targets, kappas);
  EXPECT_NEAR(c.concentration, 0.0, 1e-14);
}

TEST(Consensus, NegativeWeightPointsAway) {
  const std::array<double, 2> kappas{0.0, -3.0};
  const std::array<double, 1> targets{kPi / 2};
  const auto c = consensus_vector<double>(0.0, targets, kappas);
  EXPECT_NEAR(c.mean_direction, -kPi / 2, 1e-14);
  EXPECT_NEAR(c.concentration, 3.0, 1e-14);
}

TEST(Consensus, OrthogonalComponents) {
  const std::array<double, 2> kappas{3.0, 4.0};
  const std::array<double, 1> targets{kPi / 2};
  const auto c = consensus_vector<double>(0.0, targets, kappas);
  EXPECT_NEAR(c.concentration, 5.0, 1e-14);
  EXPECT_NEAR(c.mean_direction, std::atan2(4.0, 3.0), 1e-14);
}

// Reference values from scipy.special (i0, i1, ive).
TEST(Bessel, OracleValues) {
  EXPECT_NEAR(bessel_i0(0.0), 1.0, 1e-15);
  EXPECT_NEAR(bessel_i0(1.0), 1.2660658777520084, 1e-15 * 1.27);
  EXPECT_NEAR(bessel_i0(5.0), 27.239871823604442, 1e-14 * 27.24);
  EXPECT_NEAR(log_bessel_i0(20.0), std::log(43558282.559553534), 1e-13);
  EXPECT_NEAR(log_bessel_i0(700.0), 695.8056999984434, 1e-12);
  EXPECT_NEAR(bessel_ratio_i1_i0(1.0), 0.5651591039924851 / 1.2660658777520084, 1e-14);
  EXPECT_NEAR(log_bessel_i1(2.0), std::log(1.5906368546373295), 1e-14);
}

TEST(Bessel, ContinuousWhereTheLogFormTakesOver) {
  const double lo = log_bessel_i0(700.0 - 1e-9);
  const double hi = log_bessel_i0(700.0 + 1e-9);
  // d/dx log I_nu(x) is close to 1 here
  EXPECT_NEAR(hi - lo, 2e-9, 1e-11);
  EXPECT_NEAR(log_bessel_i1(700.0 + 1e-9) - log_bessel_i1(700.0 - 1e-9), 2e-9, 1e-11);
  EXPECT_NEAR(bessel_ratio_i1_i0(700.0 - 1e-9), bessel_ratio_i1_i0(700.0 + 1e-9), 1e-13);
}

// scipy: log(ive(nu, x)) + x and ive(1, x) / ive(0, x)
TEST(Bessel, LargeArgumentOracles) {
  EXPECT_NEAR(log_bessel_i0(700.5), 696.3053428554342, 1e-12);
  EXPECT_NEAR(log_bessel_i0(1000.0), 995.6273088898695, 1e-12);
  EXPECT_NEAR(log_bessel_i0(5000.0), 4994.822489873588, 1e-11);
  EXPECT_NEAR(log_bessel_i1(1000.0), 995.62680863964, 1e-12);
  EXPECT_NEAR(bessel_ratio_i1_i0(700.5), 0.9992859690231598, 1e-14);
  EXPECT_NEAR(bessel_ratio_i1_i0(5000.0), 0.9998999949989995, 1e-14);
}

TEST(Bessel, OverflowReported) {
  try {
    bessel_i0(1000.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Overflow);
  }
  EXPECT_TRUE(std::isfinite(log_bessel_i0(1000.0)));
}

TEST(VonMises, KappaZeroIsUniform) {
  EXPECT_NEAR(vonmises_logpdf(1.3, -0.4, 0.0), -std::log(2 * kPi), 1e-15);
}

TEST(VonMises, DensityIntegratesToOne) {
  for (double kappa : {0.0, 0.5, 2.0, 10.0, 15.0, 20.0, 25.0, 100.0}) {
    const double total =
        integrate([&](double phi) { return std::exp(vonmises_logpdf(phi, 0.3, kappa)); }, -kPi, kPi);
    EXPECT_NEAR(total, 1.0, 1e-10) << "kappa=" << kappa;
  }
}

TEST(VonMises, SamplerMoments) {
  Rng rng(5);
  for (double kappa : {1e-9, 0.5, 4.0, 20.0}) {
    const double mu = -2.5;
    double c = 0.0, s = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double x = vonmises_sample(rng, mu, kappa);
      ASSERT_GT(x, -kPi);
      ASSERT_LE(x, kPi);
      c += std::cos(x - mu);
      s += std::sin(x - mu);
    }
    // E cos(X - mu) = I1/I0, E sin(X - mu) = 0; tolerance is ~5 Monte Carlo SEs
    EXPECT_NEAR(c / n, bessel_ratio_i1_i0(kappa), 5.0 / std::sqrt(n)) << kappa;
    EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n)) << kappa;
  }
}

TEST(VonMises, SamplerMatchesCdf) {
  Rng rng(9);
  const double kappa = 2.0;
  const int n = 100000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = vonmises_sample(rng, 0.0, kappa);
  std::sort(xs.begin(), xs.end());
  double worst = 0.0;
  for (double q : {-2.0, -1.0, -0.3, 0.0, 0.4, 1.5, 2.5}) {
    const double cdf = integrate([&](double p) { return std::exp(vonmises_logpdf(p, 0.0, kappa)); }, -kPi, q, 200);
    const double emp = static_cast<double>(std::lower_bound(xs.begin(), xs.end(), q) - xs.begin()) / n;
    worst = std::max(worst, std::abs(cdf - emp));
  }
  EXPECT_LT(worst, 1.63 / std::sqrt(n));  // 1% Kolmogorov critical value
}
