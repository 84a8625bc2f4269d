#include "mssf/circular.hpp"

#include "mssf/errors.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mssf {

namespace {

// Beyond this, I_nu overflows a double and only the log form is usable.
constexpr double kDirectLimit = 700.0;

// I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k; returns the sum
double asymptotic_sum(double x, int nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break;  // series starts diverging
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double log_bessel_asymptotic(double x, int nu) {
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(asymptotic_sum(x, nu));
}

}  // namespace

double log_bessel_i0(double x) {
  x = std::abs(x);
  if (x <= kDirectLimit) return std::log(boost::math::cyl_bessel_i(0, x));
  return log_bessel_asymptotic(x, 0);
}

double log_bessel_i1(double x) {
  x = std::abs(x);
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (x <= kDirectLimit) return std::log(boost::math::cyl_bessel_i(1, x));
  return log_bessel_asymptotic(x, 1);
}

double bessel_i0(double x) {
  const double lv = log_bessel_i0(x);
  if (lv > std::log(std::numeric_limits<double>::max())) {
    throw Error(ErrorCode::Overflow, "I0(" + std::to_string(x) + ") exceeds the double range");
  }
  return std::exp(lv);
}

double bessel_ratio_i1_i0(double x) {
  x = std::abs(x);
  if (x < 1e-8) return 0.5 * x;
  if (x <= kDirectLimit) return boost::math::cyl_bessel_i(1, x) / boost::math::cyl_bessel_i(0, x);
  return asymptotic_sum(x, 1) / asymptotic_sum(x, 0);
}

double vonmises_sample(Rng& rng, double mu, double kappa) {
  if (kappa < 1e-8) return uniform_angle(rng);
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
  const double r = (1.0 + b * b) / (2.0 * b);
  double f = 0.0;
  for (;;) {
    const double u1 = uniform_open(rng);
    const double u2 = uniform_open(rng);
    const double z = std::cos(std::numbers::pi * u1);
    f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0) break;
    if (std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  const double u3 = uniform_open(rng);
  const double theta = std::acos(std::clamp(f, -1.0, 1.0));
  return wrap_angle(u3 > 0.5 ? mu + theta : mu - theta);
}

}  // namespace mssf
