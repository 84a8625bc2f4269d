#include "mssf/distance_family.hpp"

#include "mssf/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

namespace mssf {

const ExpFamilySpec& gamma_family() {
  static const ExpFamilySpec spec{
      2,
      [](double d) {
        Eigen::VectorXd t(2);
        t << std::log(d), -d;
        return t;
      },
      [](double) { return 0.0; },
      [](const Eigen::VectorXd& eta) {
        const double shape = eta(0) + 1.0;
        return std::lgamma(shape) + shape * std::log(1.0 / eta(1));
      },
      [](const Eigen::VectorXd& eta) { return eta(0) > -1.0 && eta(1) > 0.0; },
  };
  return spec;
}

Eigen::Vector2d gamma_to_natural(const GammaParams& g) {
  if (!(g.shape > 0.0) || !(g.scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma shape and scale must be positive");
  }
  return {g.shape - 1.0, 1.0 / g.scale};
}

GammaParams natural_to_gamma(const Eigen::Vector2d& eta) {
  if (!(eta(0) > -1.0) || !(eta(1) > 0.0)) {
    throw Error(ErrorCode::InvalidNaturalParams, "gamma natural parameters need eta1 > -1 and eta2 > 0");
  }
  return {eta(0) + 1.0, 1.0 / eta(1)};
}

double gamma_logpdf(double d, const GammaParams& g) {
  const ExpFamilySpec& fam = gamma_family();
  const Eigen::VectorXd eta = gamma_to_natural(g);
  return fam.log_base_measure(d) + eta.dot(fam.sufficient_stats(d)) - fam.log_partition(eta);
}

double gamma_cdf(double d, const GammaParams& g) {
  return d <= 0.0 ? 0.0 : boost::math::gamma_p(g.shape, d / g.scale);
}

double gamma_quantile(double p, const GammaParams& g) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile order must lie in (0, 1)");
  }
  return boost::math::gamma_p_inv(g.shape, p) * g.scale;
}

double gamma_sample(Rng& rng, const GammaParams& g) {
  double shape = g.shape;
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(uniform_open(rng), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v * boost * g.scale;
    }
  }
}

}  // namespace mssf
