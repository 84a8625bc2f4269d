#pragma once

#include "mssf/random.hpp"

#include <Eigen/Dense>

#include <functional>

namespace mssf {

/// Exponential family on d > 0: b(d) exp(eta' T(d) - A(eta)).
struct ExpFamilySpec {
  int dimension{};
  std::function<Eigen::VectorXd(double)> sufficient_stats;
  std::function<double(double)> log_base_measure;
  std::function<double(const Eigen::VectorXd&)> log_partition;
  std::function<bool(const Eigen::VectorXd&)> in_domain;
};

/// Gamma family: T(d) = (log d, -d), log b = 0, eta = (shape - 1, rate).
const ExpFamilySpec& gamma_family();

struct GammaParams {
  double shape{1.0};
  double scale{1.0};

  double mean() const { return shape * scale; }
  double variance() const { return shape * scale * scale; }
};

Eigen::Vector2d gamma_to_natural(const GammaParams& g);
/// Throws InvalidNaturalParams unless eta1 > -1 and eta2 > 0.
GammaParams natural_to_gamma(const Eigen::Vector2d& eta);

/// Log-density through the exponential-family decomposition.
double gamma_logpdf(double d, const GammaParams& g);
double gamma_cdf(double d, const GammaParams& g);
double gamma_quantile(double p, const GammaParams& g);

/// Marsaglia-Tsang squeeze sampler, with the U^(1/shape) boost for shape < 1.
double gamma_sample(Rng& rng, const GammaParams& g);

}  // namespace mssf
