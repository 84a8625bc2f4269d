#include "mssf/em.hpp"

#include "mssf/errors.hpp"
#include "mssf/parallel.hpp"
#include "mssf/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mssf {

void EmConfig::validate() const {
  if (num_states < 1) throw Error(ErrorCode::Config, "number of states must be at least 1");
  if (!(tol > 0.0)) throw Error(ErrorCode::Config, "tol must be positive");
  if (num_states > 1 && n_short_runs < 1) throw Error(ErrorCode::Config, "need at least one short run");
  if (short_iters < 1 || long_max_iters < 1) throw Error(ErrorCode::Config, "iteration caps must be positive");
  if (initial_distribution && initial_distribution->size() != num_states) {
    throw Error(ErrorCode::Config, "initial distribution must have one entry per state");
  }
}

double observed_loglik(const EmissionModel& model, std::span<const StateParams> states, const HmmParams& hmm) {
  return forward_loglik(emissions(model, states), hmm);
}

EmRun run_em(const EmissionModel& model, std::vector<StateParams> states, HmmParams hmm, int max_iters, double tol) {
  EmRun run;
  const auto k = static_cast<Eigen::Index>(states.size());
  run.posterior = filter_smooth(emissions(model, states), hmm);
  run.trace.push_back(run.posterior.loglik);
  run.min_increment = std::numeric_limits<double>::infinity();
  for (run.iterations = 0; run.iterations < max_iters;) {
    const TransitionUpdate up = update_transition(run.posterior, hmm.transition);
    auto warn = [&](const std::string& msg) {
      if (std::find(run.warnings.begin(), run.warnings.end(), msg) == run.warnings.end()) run.warnings.push_back(msg);
    };
    for (const int row : up.degenerate_rows) {
      warn("DegenerateState: state " + std::to_string(row + 1) + " has no expected occupancy");
    }
    hmm.transition = up.transition;
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::VectorXd w = run.posterior.smoothed.col(j);
      if (w.sum() < 1e-8) {
        // nothing to fit: keep the coefficients, like the transition row
        warn("DegenerateState: state " + std::to_string(j + 1) + " has no expected occupancy");
        continue;
      }
      states[static_cast<std::size_t>(j)].beta = model.fit_weighted(w, states[static_cast<std::size_t>(j)].beta).beta;
    }
    run.posterior = filter_smooth(emissions(model, states), hmm);
    ++run.iterations;
    const double prev = run.trace.back();
    const double cur = run.posterior.loglik;
    run.trace.push_back(cur);
    run.min_increment = std::min(run.min_increment, cur - prev);
    if (std::abs(cur - prev) < tol * std::abs(prev)) {
      run.converged = true;
      break;
    }
  }
  run.states = std::move(states);
  run.hmm = std::move(hmm);
  return run;
}

std::vector<double> ordering_keys(std::span<const StateParams> states, const std::vector<std::string>& names,
                                  const StateOrdering& ordering) {
  auto find = [&](const char* n) -> Eigen::Index {
    const auto it = std::find(names.begin(), names.end(), n);
    return it == names.end() ? -1 : static_cast<Eigen::Index>(it - names.begin());
  };
  const Eigen::Index ilog = find("log_distance");
  const Eigen::Index ineg = find("neg_distance");
  std::vector<double> keys(states.size(), 0.0);
  bool all_valid = ilog >= 0 && ineg >= 0;
  if (all_valid) {
    for (std::size_t k = 0; k < states.size(); ++k) {
      const double e1 = states[k].beta(ilog) + ordering.distance_shift(0);
      const double e2 = states[k].beta(ineg) + ordering.distance_shift(1);
      if (!(e1 > -1.0) || !(e2 > 0.0)) {
        all_valid = false;
        break;
      }
      keys[k] = (e1 + 1.0) / e2;
    }
  }
  if (all_valid) return keys;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (ineg >= 0) {
      keys[k] = -(states[k].beta(ineg) + ordering.distance_shift(1));
    } else if (ilog >= 0) {
      keys[k] = states[k].beta(ilog) + ordering.distance_shift(0);
    } else {
      keys[k] = static_cast<double>(k);
    }
  }
  return keys;
}

void reorder_states(FitResult& fit, const std::vector<int>& order) {
  const auto k = static_cast<Eigen::Index>(order.size());
  std::vector<StateParams> states;
  Eigen::MatrixXd trans(k, k);
  Eigen::VectorXd init(k);
  Eigen::MatrixXd smooth(fit.smooth_probs.rows(), k);
  Eigen::MatrixXd bse(fit.beta_std_errors.rows() == k ? k : 0, fit.beta_std_errors.cols());
  Eigen::MatrixXd tse(fit.transition_std_errors.rows() == k ? k : 0, fit.transition_std_errors.cols());
  for (Eigen::Index i = 0; i < k; ++i) {
    const int oi = order[static_cast<std::size_t>(i)];
    states.push_back(fit.state_params[static_cast<std::size_t>(oi)]);
    init(i) = fit.hmm.initial(oi);
    if (smooth.rows() > 0) smooth.col(i) = fit.smooth_probs.col(oi);
    if (bse.rows() > 0) bse.row(i) = fit.beta_std_errors.row(oi);
    for (Eigen::Index j = 0; j < k; ++j) {
      trans(i, j) = fit.hmm.transition(oi, order[static_cast<std::size_t>(j)]);
      if (tse.rows() > 0) tse(i, j) = fit.transition_std_errors(oi, order[static_cast<std::size_t>(j)]);
    }
  }
  fit.state_params = std::move(states);
  fit.hmm.transition = trans;
  fit.hmm.initial = init;
  fit.smooth_probs = smooth;
  if (bse.rows() > 0) fit.beta_std_errors = bse;
  if (tse.rows() > 0) fit.transition_std_errors = tse;
}

namespace {

struct Packing {
  Eigen::Index k;
  Eigen::Index r;
  Eigen::Index size() const { return k * r + k * (k - 1); }
};

Eigen::VectorXd pack(std::span<const StateParams> states, const HmmParams& hmm, const Packing& pk) {
  Eigen::VectorXd theta(pk.size());
  Eigen::Index at = 0;
  for (const auto& s : states) {
    theta.segment(at, pk.r) = s.beta;
    at += pk.r;
  }
  for (Eigen::Index h = 0; h < pk.k; ++h) {
    const double diag = std::max(hmm.transition(h, h), 1e-300);
    for (Eigen::Index j = 0; j < pk.k; ++j) {
      if (j == h) continue;
      theta(at++) = std::log(std::max(hmm.transition(h, j), 1e-300) / diag);
    }
  }
  return theta;
}

void unpack(const Eigen::VectorXd& theta, const Packing& pk, std::vector<StateParams>& states, HmmParams& hmm) {
  Eigen::Index at = 0;
  states.resize(static_cast<std::size_t>(pk.k));
  for (auto& s : states) {
    s.beta = theta.segment(at, pk.r);
    at += pk.r;
  }
  for (Eigen::Index h = 0; h < pk.k; ++h) {
    Eigen::RowVectorXd e(pk.k);
    for (Eigen::Index j = 0; j < pk.k; ++j) e(j) = j == h ? 0.0 : theta(at++);
    const double m = e.maxCoeff();
    e = (e.array() - m).exp();
    hmm.transition.row(h) = e / e.sum();
  }
}

}  // namespace

StdErrors standard_errors(const EmissionModel& model, std::span<const StateParams> states, const HmmParams& hmm) {
  const Packing pk{static_cast<Eigen::Index>(states.size()), model.dimension()};
  const Eigen::Index n = pk.size();
  const Eigen::VectorXd theta0 = pack(states, hmm, pk);
  HmmParams work = hmm;
  std::vector<StateParams> ws;
  auto f = [&](const Eigen::VectorXd& theta) {
    unpack(theta, pk, ws, work);
    try {
      return observed_loglik(model, ws, work);
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd step(n);
  for (Eigen::Index i = 0; i < n; ++i) step(i) = std::max(1e-5, 1e-5 * std::abs(theta0(i)));
  const double f0 = f(theta0);
  Eigen::MatrixXd hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd tp = theta0;
    Eigen::VectorXd tm = theta0;
    tp(i) += step(i);
    tm(i) -= step(i);
    hess(i, i) = (f(tp) - 2.0 * f0 + f(tm)) / (step(i) * step(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = theta0, pm = theta0, mp = theta0, mm = theta0;
      pp(i) += step(i), pp(j) += step(j);
      pm(i) += step(i), pm(j) -= step(j);
      mp(i) -= step(i), mp(j) += step(j);
      mm(i) -= step(i), mm(j) -= step(j);
      hess(i, j) = hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step(i) * step(j));
    }
  }

  StdErrors out;
  out.beta = Eigen::MatrixXd::Constant(pk.k, pk.r, std::numeric_limits<double>::quiet_NaN());
  out.transition = Eigen::MatrixXd::Constant(pk.k, pk.k, std::numeric_limits<double>::quiet_NaN());
  out.covariance = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  if (!hess.allFinite()) {
    out.message = "NotPositiveDefinite: the numerical Hessian is not finite";
    return out;
  }

  const Eigen::MatrixXd neg = -0.5 * (hess + hess.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(neg);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const Eigen::MatrixXd& vec = eig.eigenvectors();
  const double top = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd bad_loading = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lam(i) > 1e-12 * top) {
      cov += vec.col(i) * vec.col(i).transpose() / lam(i);
    } else {
      bad_loading += vec.col(i).cwiseAbs2();
    }
  }
  out.ok = bad_loading.maxCoeff() == 0.0;
  if (!out.ok) out.message = "NotPositiveDefinite: standard errors withheld for affected coordinates";
  out.covariance = cov;
  std::vector<bool> withheld(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) withheld[static_cast<std::size_t>(i)] = bad_loading(i) > 1e-6;

  for (Eigen::Index k = 0; k < pk.k; ++k) {
    for (Eigen::Index c = 0; c < pk.r; ++c) {
      const Eigen::Index i = k * pk.r + c;
      if (!withheld[static_cast<std::size_t>(i)]) out.beta(k, c) = std::sqrt(cov(i, i));
    }
  }
  // delta method per transition row: d pi_hk / d zeta_hj = pi_hk (1[k=j] - pi_hj)
  Eigen::Index base = pk.k * pk.r;
  for (Eigen::Index h = 0; h < pk.k && pk.k > 1; ++h) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < pk.k; ++j) {
      if (j != h) free.push_back(j);
    }
    const auto m = static_cast<Eigen::Index>(free.size());
    bool row_withheld = false;
    for (Eigen::Index a = 0; a < m; ++a) row_withheld = row_withheld || withheld[static_cast<std::size_t>(base + a)];
    if (!row_withheld) {
      const Eigen::MatrixXd block = cov.block(base, base, m, m);
      for (Eigen::Index kk = 0; kk < pk.k; ++kk) {
        Eigen::RowVectorXd jac(m);
        for (Eigen::Index a = 0; a < m; ++a) {
          const Eigen::Index j = free[static_cast<std::size_t>(a)];
          jac(a) = hmm.transition(h, kk) * ((kk == j ? 1.0 : 0.0) - hmm.transition(h, j));
        }
        out.transition(h, kk) = std::sqrt(std::max(0.0, (jac * block * jac.transpose())(0, 0)));
      }
    }
    base += m;
  }
  return out;
}

namespace {

Eigen::RowVectorXd flat_dirichlet(Rng& rng, Eigen::Index k) {
  Eigen::RowVectorXd row(k);
  for (Eigen::Index j = 0; j < k; ++j) row(j) = -std::log(uniform_open(rng));
  return row / row.sum();
}

Eigen::VectorXd perturb(Rng& rng, const EmissionModel& model, const Eigen::VectorXd& center) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::VectorXd beta = center;
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
      beta(i) += 0.5 * std::max(1.0, std::abs(center(i))) * standard_normal(rng);
    }
    if (model.in_domain(beta)) return beta;
  }
  return center;
}

struct ShortRun {
  bool ok{false};
  EmRun run;
  std::string error;
};

}  // namespace

FitResult em_fit(const EmissionModel& model, const EmConfig& config) {
  config.validate();
  const Eigen::Index k = config.num_states;
  HmmParams base = HmmParams::uniform(k);
  if (config.initial_distribution) base.initial = *config.initial_distribution;

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.num_steps());
  const Eigen::VectorXd pooled = model.fit_weighted(ones, model.default_start()).beta;

  FitResult fit;
  fit.coefficient_names = model.coefficient_names();
  double min_increment = std::numeric_limits<double>::infinity();
  EmRun best;
  if (k == 1) {
    best = run_em(model, {StateParams{pooled}}, base, config.long_max_iters, config.tol);
    min_increment = best.min_increment;
  } else {
    std::vector<ShortRun> shorts(static_cast<std::size_t>(config.n_short_runs));
    parallel_for(shorts.size(), config.threads, [&](std::size_t r) {
      Rng rng = make_rng(config.seed, "multistart", r);
      std::vector<StateParams> states;
      for (Eigen::Index j = 0; j < k; ++j) states.push_back({perturb(rng, model, pooled)});
      HmmParams hmm = base;
      for (Eigen::Index h = 0; h < k; ++h) hmm.transition.row(h) = flat_dirichlet(rng, k);
      try {
        shorts[r].run = run_em(model, std::move(states), hmm, config.short_iters, config.tol);
        shorts[r].ok = std::isfinite(shorts[r].run.posterior.loglik);
      } catch (const Error& e) {
        shorts[r].error = e.what();
      }
    });
    std::vector<std::size_t> order;
    for (std::size_t r = 0; r < shorts.size(); ++r) {
      if (shorts[r].ok) {
        order.push_back(r);
        min_increment = std::min(min_increment, shorts[r].run.min_increment);
      }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return shorts[a].run.posterior.loglik > shorts[b].run.posterior.loglik;
    });
    std::string last_error = shorts.empty() ? "no short runs" : shorts.front().error;
    bool done = false;
    for (const std::size_t r : order) {
      try {
        best = run_em(model, shorts[r].run.states, shorts[r].run.hmm, config.long_max_iters, config.tol);
        min_increment = std::min(min_increment, best.min_increment);
        done = true;
        break;
      } catch (const Error& e) {
        last_error = e.what();
      }
    }
    if (!done) throw Error(ErrorCode::AllRunsFailed, "every EM run failed; last error: " + last_error);
  }

  fit.state_params = best.states;
  fit.hmm = best.hmm;
  fit.loglik = best.posterior.loglik;
  fit.smooth_probs = best.posterior.smoothed;
  fit.n_em_iterations = best.iterations;
  fit.converged = best.converged;
  fit.loglik_trace = best.trace;
  fit.min_loglik_increment = std::isfinite(min_increment) ? min_increment : 0.0;
  fit.warnings = best.warnings;

  if (config.ordering.enabled && k > 1) {
    const auto keys = ordering_keys(fit.state_params, fit.coefficient_names, config.ordering);
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
    });
    reorder_states(fit, order);
  }

  if (config.compute_std_errors) {
    const StdErrors se = standard_errors(model, fit.state_params, fit.hmm);
    fit.beta_std_errors = se.beta;
    fit.transition_std_errors = se.transition;
    fit.std_errors_ok = se.ok;
    if (!se.ok) fit.warnings.push_back(se.message);
  }
  return fit;
}

}  // namespace mssf
