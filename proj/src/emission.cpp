#include "mssf/emission.hpp"

#include "mssf/circular.hpp"
#include "mssf/distance_family.hpp"
#include "mssf/errors.hpp"
#include "mssf/trajectory.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace mssf {

EmissionMatrix emissions(const EmissionModel& model, std::span<const StateParams> states) {
  EmissionMatrix em;
  em.log_p.resize(model.num_steps(), static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].beta.size() != model.dimension()) {
      throw Error(ErrorCode::InvalidArgument, "state coefficients do not match the covariates");
    }
    em.log_p.col(static_cast<Eigen::Index>(k)) = model.log_emissions(states[k].beta);
  }
  return em;
}

SsfEmission::SsfEmission(std::span<const ChoiceSet> sets, std::vector<std::string> names, ClogitOptions options)
    : design_(sets), names_(std::move(names)), options_(options) {
  if (static_cast<Eigen::Index>(names_.size()) != design_.dimension()) {
    throw Error(ErrorCode::InvalidArgument, "one coefficient name per covariate is required");
  }
}

Eigen::VectorXd SsfEmission::log_emissions(const Eigen::VectorXd& beta) const {
  return clogit_logprobs(design_, beta);
}

EmissionModel::MStep SsfEmission::fit_weighted(const Eigen::VectorXd& weights, const Eigen::VectorXd& init) const {
  const ClogitFit fit = clogit_fit(design_, weights, init, options_);
  return {fit.beta, fit.converged};
}

BcrwEmission::BcrwEmission(const Trajectory& trajectory, std::span<const Target> targets) {
  const Eigen::Index n = trajectory.num_steps() - 1;
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least two steps");
  const auto p = static_cast<Eigen::Index>(targets.size());
  names_ = {"log_distance", "neg_distance", "cos_persistence"};
  for (const auto& tg : targets) names_.push_back("cos_target:" + tg.name);
  log_distance_.resize(n);
  distance_.resize(n);
  cos_terms_.resize(n, p + 1);
  directions_.resize(n, p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index t = i + 1;
    const double phi = trajectory.angles(t);
    distance_(i) = trajectory.distances(t);
    log_distance_(i) = std::log(distance_(i));
    directions_(i, 0) = trajectory.angles(t - 1);
    const auto bearings = target_bearings(trajectory.points[static_cast<std::size_t>(t)], targets);
    for (Eigen::Index j = 0; j < p; ++j) directions_(i, j + 1) = bearings[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j <= p; ++j) cos_terms_(i, j) = std::cos(phi - directions_(i, j));
  }
}

bool BcrwEmission::in_domain(const Eigen::VectorXd& beta) const {
  return beta.size() == dimension() && beta(0) > -1.0 && beta(1) > 0.0;
}

Eigen::VectorXd BcrwEmission::default_start() const {
  const double m = distance_.mean();
  const double v = (distance_.array() - m).square().mean();
  const double shape = std::max(0.05, v > 0.0 ? m * m / v : 1.0);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(dimension());
  beta(0) = shape - 1.0;
  beta(1) = shape / m;
  return beta;
}

namespace {

double consensus_length(const Eigen::Ref<const Eigen::RowVectorXd>& directions, const Eigen::VectorXd& kappa,
                        Eigen::Vector2d* v_out = nullptr) {
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (Eigen::Index j = 0; j < kappa.size(); ++j) {
    v += kappa(j) * Eigen::Vector2d(std::cos(directions(j)), std::sin(directions(j)));
  }
  if (v_out != nullptr) *v_out = v;
  return v.norm();
}

double gamma_block_loglik(double a, double b, double w, double sl, double sd) {
  if (!(a > 0.0) || !(b > 0.0)) return -std::numeric_limits<double>::infinity();
  return (a - 1.0) * sl - b * sd - w * std::lgamma(a) + w * a * std::log(b);
}

// Newton ascent with step halving for a smooth concave objective.
template <typename Value, typename Derivs>
Eigen::VectorXd newton_ascent(Eigen::VectorXd x, const Value& value, const Derivs& derivs, bool& converged) {
  const Eigen::Index r = x.size();
  double fx = value(x);
  converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    derivs(x, g, h);
    if (g.cwiseAbs().maxCoeff() <= 1e-8) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd info = -h;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd dir = ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || dir.dot(g) <= 0.0) {
      dir = (info + 1e-8 * std::max(1.0, info.diagonal().cwiseAbs().maxCoeff()) * Eigen::MatrixXd::Identity(r, r))
                .ldlt()
                .solve(g);
    }
    bool accepted = false;
    double step = 1.0;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Eigen::VectorXd cand = x + step * dir;
      const double fc = value(cand);
      if (std::isfinite(fc) && fc >= fx) {
        x = cand;
        fx = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      converged = g.cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, std::abs(fx));
      break;
    }
  }
  return x;
}

}  // namespace

Eigen::VectorXd BcrwEmission::log_emissions(const Eigen::VectorXd& beta) const {
  const Eigen::Index n = num_steps();
  Eigen::VectorXd out(n);
  if (!in_domain(beta)) {
    out.setConstant(-std::numeric_limits<double>::infinity());
    return out;
  }
  const double a = beta(0) + 1.0;
  const double b = beta(1);
  const Eigen::VectorXd kappa = beta.tail(dimension() - 2);
  const double norm_const = std::lgamma(a) - a * std::log(b) + std::log(2.0 * std::numbers::pi);
  const Eigen::VectorXd linear = cos_terms_ * kappa;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double len = consensus_length(directions_.row(t), kappa);
    out(t) = beta(0) * log_distance_(t) - b * distance_(t) + linear(t) - norm_const - log_bessel_i0(len);
  }
  return out;
}

double BcrwEmission::weighted_loglik(const Eigen::VectorXd& weights, const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd le = log_emissions(beta);
  double s = 0.0;
  for (Eigen::Index t = 0; t < le.size(); ++t) {
    if (weights(t) >= kMinWeight) s += weights(t) * le(t);
  }
  return s;
}

EmissionModel::MStep BcrwEmission::fit_weighted(const Eigen::VectorXd& weights, const Eigen::VectorXd& init) const {
  const Eigen::Index n = num_steps();
  const Eigen::Index q = dimension() - 2;
  if (weights.size() != n) throw Error(ErrorCode::InvalidArgument, "weights length mismatch");
  Eigen::VectorXd w = weights;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (w(t) < kMinWeight) w(t) = 0.0;
  }
  const double wsum = w.sum();
  if (!(wsum > 0.0)) throw Error(ErrorCode::NotIdentified, "every step has zero weight");
  const Eigen::VectorXd start = in_domain(init) ? init : default_start();

  // step lengths: shape a = eta1 + 1 and rate b = eta2
  const double sl = w.dot(log_distance_);
  const double sd = w.dot(distance_);
  auto gamma_value = [&](const Eigen::VectorXd& x) { return gamma_block_loglik(x(0), x(1), wsum, sl, sd); };
  auto gamma_derivs = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    const double a = x(0);
    const double b = x(1);
    g.resize(2);
    g << sl - wsum * boost::math::digamma(a) + wsum * std::log(b), -sd + wsum * a / b;
    h.resize(2, 2);
    h << -wsum * boost::math::trigamma(a), wsum / b, wsum / b, -wsum * a / (b * b);
  };
  bool gamma_ok = false;
  const Eigen::VectorXd ab =
      newton_ascent(Eigen::Vector2d(start(0) + 1.0, start(1)), gamma_value, gamma_derivs, gamma_ok);

  // headings: weighted consensus von Mises in kappa
  auto vm_value = [&](const Eigen::VectorXd& kappa) {
    double f = 0.0;
    const Eigen::VectorXd linear = cos_terms_ * kappa;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (w(t) == 0.0) continue;
      f += w(t) * (linear(t) - log_bessel_i0(consensus_length(directions_.row(t), kappa)));
    }
    return f;
  };
  auto vm_derivs = [&](const Eigen::VectorXd& kappa, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    g = Eigen::VectorXd::Zero(q);
    h = Eigen::MatrixXd::Zero(q, q);
    Eigen::MatrixXd u(2, q);
    for (Eigen::Index t = 0; t < n; ++t) {
      if (w(t) == 0.0) continue;
      for (Eigen::Index j = 0; j < q; ++j) u.col(j) << std::cos(directions_(t, j)), std::sin(directions_(t, j));
      const Eigen::Vector2d v = u * kappa;
      const double len = v.norm();
      const Eigen::MatrixXd utu = u.transpose() * u;
      if (len < 1e-6) {
        g += w(t) * cos_terms_.row(t).transpose();
        h -= w(t) * 0.5 * utu;
        continue;
      }
      const double a = bessel_ratio_i1_i0(len);
      const double a_prime = 1.0 - a / len - a * a;
      const Eigen::VectorXd dir = u.transpose() * (v / len);
      g += w(t) * (cos_terms_.row(t).transpose() - a * dir);
      h -= w(t) * (a_prime * dir * dir.transpose() + (a / len) * (utu - dir * dir.transpose()));
    }
  };
  bool vm_ok = false;
  const Eigen::VectorXd kappa = newton_ascent(start.tail(q), vm_value, vm_derivs, vm_ok);

  MStep out;
  out.beta.resize(dimension());
  out.beta(0) = ab(0) - 1.0;
  out.beta(1) = ab(1);
  out.beta.tail(q) = kappa;
  out.converged = gamma_ok && vm_ok;
  return out;
}

}  // namespace mssf
