#include "mssf/clogit.hpp"

#include "mssf/errors.hpp"

#include <cmath>
#include <limits>

namespace mssf {

ClogitDesign::ClogitDesign(std::span<const ChoiceSet> sets) {
  if (sets.empty()) throw Error(ErrorCode::InvalidArgument, "no choice sets");
  const Eigen::Index r = sets.front().dimension();
  Eigen::Index rows = 0;
  for (const auto& cs : sets) {
    if (cs.dimension() != r) throw Error(ErrorCode::InvalidArgument, "choice sets disagree on dimension");
    if (cs.num_alternatives() < 2) throw Error(ErrorCode::InvalidArgument, "a choice set needs a control");
    rows += cs.num_alternatives();
  }
  covariates_.resize(rows, r);
  offsets_.resize(rows);
  starts_.clear();
  starts_.reserve(sets.size() + 1);
  Eigen::Index at = 0;
  for (const auto& cs : sets) {
    starts_.push_back(at);
    covariates_.middleRows(at, cs.num_alternatives()) = cs.covariates;
    offsets_.segment(at, cs.num_alternatives()) = cs.offsets;
    at += cs.num_alternatives();
  }
  starts_.push_back(at);
}

namespace {

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

double clogit_logprob(const ChoiceSet& cs, const Eigen::VectorXd& beta) {
  if (beta.size() != cs.dimension()) throw Error(ErrorCode::InvalidArgument, "beta dimension mismatch");
  const Eigen::VectorXd eta = cs.covariates * beta + cs.offsets;
  return eta(0) - log_sum_exp(eta);
}

Eigen::VectorXd clogit_logprobs(const ClogitDesign& design, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = design.covariates() * beta + design.offsets();
  Eigen::VectorXd out(design.num_sets());
  for (Eigen::Index t = 0; t < design.num_sets(); ++t) {
    const auto seg = eta.segment(design.start(t), design.size(t));
    out(t) = seg(0) - log_sum_exp(seg);
  }
  return out;
}

double clogit_value(const ClogitDesign& design, const Eigen::VectorXd& weights, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = design.covariates() * beta + design.offsets();
  double value = 0.0;
  for (Eigen::Index t = 0; t < design.num_sets(); ++t) {
    if (weights(t) < kMinWeight) continue;
    const auto seg = eta.segment(design.start(t), design.size(t));
    value += weights(t) * (seg(0) - log_sum_exp(seg));
  }
  return value;
}

ClogitObjective clogit_objective(const ClogitDesign& design, const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& beta) {
  if (weights.size() != design.num_sets()) throw Error(ErrorCode::InvalidArgument, "weights length mismatch");
  if (beta.size() != design.dimension()) throw Error(ErrorCode::InvalidArgument, "beta dimension mismatch");
  const Eigen::Index r = design.dimension();
  const Eigen::MatrixXd& x = design.covariates();
  const Eigen::VectorXd eta = x * beta + design.offsets();

  ClogitObjective obj;
  obj.gradient = Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd mean_outer = Eigen::MatrixXd::Zero(r, r);
  // row_weight ends up as w_t * p_{t,i}: the weights of the within-stratum second moment
  Eigen::VectorXd row_weight = Eigen::VectorXd::Zero(x.rows());
  Eigen::VectorXd mean(r);
  for (Eigen::Index t = 0; t < design.num_sets(); ++t) {
    const double w = weights(t);
    if (w < kMinWeight) continue;
    const Eigen::Index s = design.start(t);
    const Eigen::Index n = design.size(t);
    const auto seg = eta.segment(s, n);
    auto p = row_weight.segment(s, n);
    const double m = seg.maxCoeff();
    p = (seg.array() - m).exp().matrix();
    const double z = p.sum();
    obj.value += w * (seg(0) - m - std::log(z));
    p *= 1.0 / z;
    mean.noalias() = x.middleRows(s, n).transpose() * p;
    obj.gradient += w * (x.row(s).transpose() - mean);
    mean_outer.noalias() += w * mean * mean.transpose();
    p *= w;
  }
  obj.hessian.noalias() = -(x.transpose() * row_weight.asDiagonal() * x);
  obj.hessian += mean_outer;
  obj.hessian = 0.5 * (obj.hessian + obj.hessian.transpose()).eval();
  return obj;
}

namespace {

// True when moving along `dir` never lowers the case's score relative to any
// control in any weighted stratum, i.e. the likelihood has no finite maximum
// in that direction.
bool is_recession_direction(const ClogitDesign& design, const Eigen::VectorXd& weights,
                            const Eigen::VectorXd& dir) {
  const Eigen::VectorXd score = design.covariates() * dir;
  const double scale = std::max(1.0, score.cwiseAbs().maxCoeff());
  for (Eigen::Index t = 0; t < design.num_sets(); ++t) {
    if (weights(t) < kMinWeight) continue;
    const auto seg = score.segment(design.start(t), design.size(t));
    if ((seg.array() - seg(0)).maxCoeff() > 1e-10 * scale) return false;
  }
  return true;
}

}  // namespace

ClogitFit clogit_fit(const ClogitDesign& design, const Eigen::VectorXd& weights, const Eigen::VectorXd& init,
                     const ClogitOptions& options) {
  const Eigen::Index r = design.dimension();
  ClogitFit fit;
  fit.beta = init.size() == r ? init : Eigen::VectorXd::Zero(r);
  if ((weights.array() >= kMinWeight).count() == 0) {
    throw Error(ErrorCode::NotIdentified, "every stratum has zero weight");
  }

  ClogitObjective obj = clogit_objective(design, weights, fit.beta);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-obj.hessian, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * top) {
      throw Error(ErrorCode::NotIdentified, "within-stratum covariate covariance is singular");
    }
  }

  for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
    fit.gradient_norm = obj.gradient.cwiseAbs().maxCoeff();
    if (fit.gradient_norm <= options.gradient_tol) {
      fit.converged = true;
      break;
    }
    if (fit.beta.norm() > options.separation_norm) {
      throw Error(ErrorCode::Separation, "coefficients diverge (|beta| > " +
                                             std::to_string(options.separation_norm) + ")");
    }
    const Eigen::MatrixXd info = -obj.hessian;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd dir = ldlt.solve(obj.gradient);
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || dir.dot(obj.gradient) <= 0.0) {
      const double ridge = 1e-8 * std::max(1.0, info.diagonal().cwiseAbs().maxCoeff());
      dir = (info + ridge * Eigen::MatrixXd::Identity(r, r)).ldlt().solve(obj.gradient);
    }
    // Newton decrement at rounding level: the value can no longer rank
    // candidates, so take the full step only if it shrinks the gradient
    if (dir.dot(obj.gradient) <= 1e-13 * std::max(1.0, std::abs(obj.value))) {
      ClogitObjective next = clogit_objective(design, weights, fit.beta + dir);
      if (next.gradient.allFinite() && next.gradient.cwiseAbs().maxCoeff() < fit.gradient_norm) {
        fit.beta += dir;
        obj = std::move(next);
        continue;
      }
      fit.converged = true;
      break;
    }
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      const Eigen::VectorXd cand = fit.beta + step * dir;
      // a full step is usually accepted, so evaluate everything at once
      if (halving == 0) {
        ClogitObjective next = clogit_objective(design, weights, cand);
        if (std::isfinite(next.value) && next.value >= obj.value) {
          fit.beta = cand;
          obj = std::move(next);
          accepted = true;
          break;
        }
        continue;
      }
      const double v = clogit_value(design, weights, cand);
      if (std::isfinite(v) && v >= obj.value) {
        fit.beta = cand;
        obj = clogit_objective(design, weights, fit.beta);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no representable improvement left
  }
  fit.gradient_norm = obj.gradient.cwiseAbs().maxCoeff();
  fit.value = obj.value;
  if (!fit.converged) {
    // stalled at rounding level: accept when the Newton decrement is negligible
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-obj.hessian);
    const double decrement = obj.gradient.dot(ldlt.solve(obj.gradient));
    fit.converged = ldlt.info() == Eigen::Success && decrement >= 0.0 &&
                    decrement <= 1e-13 * std::max(1.0, std::abs(fit.value));
  }
  const double bnorm = fit.beta.norm();
  if (bnorm > options.separation_norm ||
      (bnorm > 0.0 && is_recession_direction(design, weights, fit.beta / bnorm))) {
    throw Error(ErrorCode::Separation, "the case is perfectly discriminated along the fitted direction");
  }
  return fit;
}

}  // namespace mssf
