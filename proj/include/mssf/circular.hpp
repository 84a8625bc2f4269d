#pragma once

#include "mssf/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>

namespace mssf {

/// Maps `a` onto (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar r = std::remainder(a, Scalar(2) * pi);
  if (r <= -pi) r += Scalar(2) * pi;
  if (r > pi) r -= Scalar(2) * pi;
  return r;
}

/// Direction and length of a weighted sum of unit vectors.
template <typename Scalar>
struct Consensus {
  Scalar mean_direction{};
  Scalar concentration{};
};

/// kappas[0] weighs the previous heading, kappas[i] the i-th target bearing.
/// Negative weights point away from their direction. A zero-length result
/// reports mean direction 0.
template <typename Scalar>
Consensus<Scalar> consensus_vector(Scalar prev_direction, std::span<const Scalar> target_directions,
                                   std::span<const Scalar> kappas) {
  Eigen::Matrix<Scalar, 2, 1> v = kappas[0] * Eigen::Matrix<Scalar, 2, 1>(std::cos(prev_direction),
                                                                          std::sin(prev_direction));
  for (std::size_t i = 0; i < target_directions.size(); ++i) {
    v += kappas[i + 1] *
         Eigen::Matrix<Scalar, 2, 1>(std::cos(target_directions[i]), std::sin(target_directions[i]));
  }
  const Scalar len = v.norm();
  if (len == Scalar(0)) return {Scalar(0), Scalar(0)};
  return {wrap_angle(std::atan2(v.y(), v.x())), len};
}

/// Modified Bessel function of the first kind, order 0. Throws Overflow when
/// the value is not representable as a double.
double bessel_i0(double x);
double log_bessel_i0(double x);
/// Order 1, log domain; x >= 0 (log I1(0) = -inf).
double log_bessel_i1(double x);
/// Mean resultant length of a von Mises(kappa): I1(kappa) / I0(kappa).
double bessel_ratio_i1_i0(double x);

template <typename Scalar>
Scalar vonmises_logpdf(Scalar phi, Scalar mu, Scalar kappa) {
  return kappa * std::cos(phi - mu) - std::log(Scalar(2) * std::numbers::pi_v<Scalar>) -
         Scalar(log_bessel_i0(static_cast<double>(kappa)));
}

/// Best-Fisher rejection sampler; kappa == 0 is uniform on (-pi, pi].
double vonmises_sample(Rng& rng, double mu, double kappa);

inline double uniform_angle(Rng& rng) {
  return wrap_angle(std::numbers::pi * (2.0 * uniform_open(rng) - 1.0));
}

}  // namespace mssf
