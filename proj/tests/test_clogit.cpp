#include "mssf/clogit.hpp"
#include "mssf/errors.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace mssf;
using mssf::testing::random_choice_sets;
using mssf::testing::simulated_choice_sets;

namespace {

// Direct per-stratum evaluation, independent of the packed design.
double naive_loglik(const std::vector<ChoiceSet>& sets, const Eigen::VectorXd& w, const Eigen::VectorXd& beta) {
  double total = 0.0;
  for (std::size_t t = 0; t < sets.size(); ++t) {
    const auto& cs = sets[t];
    double z = 0.0;
    for (Eigen::Index j = 0; j < cs.num_alternatives(); ++j) {
      z += std::exp(cs.covariates.row(j).dot(beta) + cs.offsets(j));
    }
    total += w(static_cast<Eigen::Index>(t)) * (cs.covariates.row(0).dot(beta) + cs.offsets(0) - std::log(z));
  }
  return total;
}

}  // namespace

TEST(Clogit, ZeroCoefficientsGiveUniformChoice) {
  Rng rng(1);
  for (int j : {1, 20, 500}) {
    const auto sets = random_choice_sets(rng, 5, j, 3);
    for (const auto& cs : sets) {
      EXPECT_NEAR(std::exp(clogit_logprob(cs, Eigen::Vector3d::Zero())), 1.0 / (j + 1), 1e-14);
    }
  }
}

TEST(Clogit, LogProbMatchesNaive) {
  Rng rng(2);
  const auto sets = random_choice_sets(rng, 10, 15, 4, true);
  const Eigen::Vector4d beta(0.5, -1.0, 2.0, 0.1);
  const ClogitDesign design(sets);
  const Eigen::VectorXd lp = clogit_logprobs(design, beta);
  for (std::size_t t = 0; t < sets.size(); ++t) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(10);
    w(static_cast<Eigen::Index>(t)) = 1.0;
    EXPECT_NEAR(lp(static_cast<Eigen::Index>(t)), naive_loglik(sets, w, beta), 1e-12);
    EXPECT_NEAR(clogit_logprob(sets[t], beta), lp(static_cast<Eigen::Index>(t)), 1e-13);
  }
}

TEST(Clogit, ExtremeScoresStayFinite) {
  Rng rng(3);
  auto sets = random_choice_sets(rng, 3, 50, 2);
  const Eigen::Vector2d beta(400.0, -300.0);
  const ClogitDesign design(sets);
  const Eigen::VectorXd lp = clogit_logprobs(design, beta);
  EXPECT_TRUE(lp.allFinite());
  EXPECT_TRUE((lp.array() <= 0.0).all());
}

TEST(Clogit, GradientAndHessianMatchFiniteDifferences) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int r = 2 + trial % 4;
    const auto sets = random_choice_sets(rng, 12, 8, r, true);
    const ClogitDesign design(sets);
    Eigen::VectorXd w(12), beta(r);
    for (int t = 0; t < 12; ++t) w(t) = uniform_open(rng);
    for (int i = 0; i < r; ++i) beta(i) = standard_normal(rng);
    const auto obj = clogit_objective(design, w, beta);
    EXPECT_NEAR(obj.value, naive_loglik(sets, w, beta), 1e-10);
    for (int i = 0; i < r; ++i) {
      const double h = 1e-5;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(r);
      e(i) = h;
      const double fd = (naive_loglik(sets, w, beta + e) - naive_loglik(sets, w, beta - e)) / (2 * h);
      EXPECT_NEAR(obj.gradient(i), fd, 1e-6 * std::max(1.0, std::abs(fd)));
      const auto plus = clogit_objective(design, w, beta + e);
      const auto minus = clogit_objective(design, w, beta - e);
      const Eigen::VectorXd col = (plus.gradient - minus.gradient) / (2 * h);
      EXPECT_LT((obj.hessian.col(i) - col).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, col.cwiseAbs().maxCoeff()));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(obj.hessian);
    EXPECT_LE(eig.eigenvalues().maxCoeff(), 1e-12);
  }
}

TEST(Clogit, RecoversPlantedCoefficients) {
  Rng rng(5);
  const Eigen::Vector3d truth(1.0, -0.5, 0.25);
  const auto sets = simulated_choice_sets(rng, 3000, 10, truth);
  const ClogitDesign design(sets);
  const auto fit = clogit_fit(design, Eigen::VectorXd::Ones(3000), Eigen::VectorXd::Zero(3));
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(fit.gradient_norm, 1e-8);
  const auto obj = clogit_objective(design, Eigen::VectorXd::Ones(3000), fit.beta);
  const Eigen::MatrixXd cov = (-obj.hessian).inverse();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(fit.beta(i), truth(i), 4.0 * std::sqrt(cov(i, i)));
}

TEST(Clogit, WeightsActAsReplication) {
  Rng rng(6);
  const auto sets = random_choice_sets(rng, 40, 6, 2);
  std::vector<ChoiceSet> doubled = sets;
  doubled.insert(doubled.end(), sets.begin(), sets.end());
  const auto a = clogit_fit(ClogitDesign(sets), Eigen::VectorXd::Constant(40, 2.0), Eigen::VectorXd::Zero(2));
  const auto b = clogit_fit(ClogitDesign(doubled), Eigen::VectorXd::Ones(80), Eigen::VectorXd::Zero(2));
  EXPECT_LT((a.beta - b.beta).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Clogit, SeparationDetected) {
  Rng rng(7);
  auto sets = random_choice_sets(rng, 30, 10, 2);
  for (auto& cs : sets) {
    // the case always has the largest first covariate
    cs.covariates(0, 0) = cs.covariates.col(0).maxCoeff() + 1.0;
  }
  try {
    clogit_fit(ClogitDesign(sets), Eigen::VectorXd::Ones(30), Eigen::VectorXd::Zero(2));
    FAIL() << "expected Separation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Separation);
  }
}

TEST(Clogit, ConstantCovariateIsNotIdentified) {
  Rng rng(8);
  auto sets = random_choice_sets(rng, 20, 5, 2);
  for (auto& cs : sets) cs.covariates.col(1).setConstant(3.0);
  try {
    clogit_fit(ClogitDesign(sets), Eigen::VectorXd::Ones(20), Eigen::VectorXd::Zero(2));
    FAIL() << "expected NotIdentified";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotIdentified);
  }
}

TEST(Clogit, ZeroWeightStrataIgnored) {
  Rng rng(9);
  const auto sets = random_choice_sets(rng, 20, 5, 2);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(20);
  w.tail(10).setZero();
  const std::vector<ChoiceSet> head(sets.begin(), sets.begin() + 10);
  const auto a = clogit_fit(ClogitDesign(sets), w, Eigen::VectorXd::Zero(2));
  const auto b = clogit_fit(ClogitDesign(head), Eigen::VectorXd::Ones(10), Eigen::VectorXd::Zero(2));
  EXPECT_LT((a.beta - b.beta).cwiseAbs().maxCoeff(), 1e-10);
}
