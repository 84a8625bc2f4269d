#include "mssf/errors.hpp"
#include "mssf/sampler.hpp"
#include "mssf/trajectory.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace mssf;

namespace {

Trajectory zigzag(int n) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({1.5 * i, (i % 2) * 0.8});
  return derive_steps(pts);
}

}  // namespace

TEST(Controls, UniformSchemeRanges) {
  Rng rng(1);
  const auto controls = sample_controls(rng, UniformScheme{15.0}, 50000);
  double mean = 0.0;
  for (const auto& c : controls) {
    ASSERT_GT(c.distance, 0.0);
    ASSERT_LT(c.distance, 15.0);
    ASSERT_GT(c.angle, -std::numbers::pi);
    ASSERT_LE(c.angle, std::numbers::pi);
    mean += c.distance;
  }
  EXPECT_NEAR(mean / controls.size(), 7.5, 0.1);
}

TEST(Controls, ParametricSchemeIsUnitExponential) {
  Rng rng(2);
  const auto controls = sample_controls(rng, ParametricScheme{Eigen::Vector2d(0.0, 1.0)}, 100000);
  double mean = 0.0, sq = 0.0;
  for (const auto& c : controls) {
    mean += c.distance;
    sq += c.distance * c.distance;
  }
  mean /= controls.size();
  EXPECT_NEAR(mean, 1.0, 0.015);
  EXPECT_NEAR(sq / controls.size() - mean * mean, 1.0, 0.04);
}

TEST(Controls, RejectsZeroControls) {
  Rng rng(3);
  EXPECT_THROW(sample_controls(rng, UniformScheme{}, 0), Error);
}

TEST(Formula, TermNamesRoundTrip) {
  for (const std::string name :
       {"log_distance", "neg_distance", "cos_persistence", "cos_target:den", "landcover:meadow"}) {
    EXPECT_EQ(CovariateTerm::parse(name).name(), name);
  }
  EXPECT_THROW(CovariateTerm::parse("speed"), Error);
  const std::vector<Target> targets{{"centre", {0, 0}}};
  const auto f = CovariateFormula::bcrw(targets);
  EXPECT_EQ(f.names(), (std::vector<std::string>{"log_distance", "neg_distance", "cos_persistence",
                                                 "cos_target:centre"}));
  EXPECT_FALSE(f.needs_landscape());
}

TEST(ChoiceSets, LayoutAndCovariates) {
  const Trajectory tr = zigzag(12);
  CovariateContext ctx;
  ctx.targets = {{"centre", {100.0, 100.0}}};
  const auto formula = CovariateFormula::bcrw(ctx.targets);
  const auto sets = build_choice_sets(tr, ctx, formula, UniformScheme{15.0}, 30, 5);
  ASSERT_EQ(sets.size(), 10u);  // steps 1..n-1
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& cs = sets[i];
    const auto t = static_cast<Eigen::Index>(i) + 1;
    EXPECT_EQ(cs.time_index, t);
    ASSERT_EQ(cs.num_alternatives(), 31);
    EXPECT_EQ(cs.angles(0), tr.angles(t));
    EXPECT_EQ(cs.distances(0), tr.distances(t));
    const Point origin = tr.points[static_cast<std::size_t>(t)];
    const double target_bearing = bearing(origin, ctx.targets[0].location);
    for (Eigen::Index j = 0; j < cs.num_alternatives(); ++j) {
      EXPECT_DOUBLE_EQ(cs.covariates(j, 0), std::log(cs.distances(j)));
      EXPECT_DOUBLE_EQ(cs.covariates(j, 1), -cs.distances(j));
      EXPECT_DOUBLE_EQ(cs.covariates(j, 2), std::cos(cs.angles(j) - tr.angles(t - 1)));
      EXPECT_DOUBLE_EQ(cs.covariates(j, 3), std::cos(cs.angles(j) - target_bearing));
      EXPECT_EQ(cs.offsets(j), 0.0);  // log b(h) = 0 for the gamma family
    }
  }
}

TEST(ChoiceSets, DeterministicPerSeed) {
  const Trajectory tr = zigzag(8);
  CovariateContext ctx;
  ctx.targets = {{"c", {5.0, 5.0}}};
  const auto f = CovariateFormula::bcrw(ctx.targets);
  const auto a = build_choice_sets(tr, ctx, f, ParametricScheme{}, 10, 42);
  const auto b = build_choice_sets(tr, ctx, f, ParametricScheme{}, 10, 42);
  const auto c = build_choice_sets(tr, ctx, f, ParametricScheme{}, 10, 43);
  EXPECT_EQ(a[3].covariates, b[3].covariates);
  EXPECT_NE(a[3].covariates, c[3].covariates);
}

TEST(ChoiceSets, OffGridControlsDroppedAndObservedRejected) {
  LandscapeGrid g;
  g.origin = {0.0, 0.0};
  g.cell_size = 1.0;
  g.classes = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>::Constant(10, 10, 1);
  g.classes.topRows(5).setConstant(2);  // northern half is meadow
  g.legend = {{1, "forest"}, {2, "meadow"}};
  CovariateContext ctx;
  ctx.landscape = &g;
  CovariateFormula f;
  f.terms = {CovariateTerm::parse("landcover:meadow")};

  const std::vector<Step> controls{{0.0, 1.0}, {0.0, 50.0}, {std::numbers::pi / 2, 3.0}};
  const auto cs = build_choice_set(1, Step{std::numbers::pi / 2, 0.5}, controls, 0.0, Point{5.0, 4.2}, ctx, f,
                                   UniformScheme{});
  ASSERT_EQ(cs.num_alternatives(), 3);  // the 50-unit control leaves the grid
  EXPECT_EQ(cs.covariates(0, 0), 0.0);  // (5, 4.7) forest
  EXPECT_EQ(cs.covariates(1, 0), 0.0);  // (6, 4.2) forest
  EXPECT_EQ(cs.covariates(2, 0), 1.0);  // (5, 7.2) meadow

  try {
    build_choice_set(1, Step{0.0, 20.0}, controls, 0.0, Point{5.0, 5.0}, ctx, f, UniformScheme{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfGrid);
  }
}

TEST(ChoiceSets, CsvRoundTripIsExact) {
  const Trajectory tr = zigzag(6);
  CovariateContext ctx;
  ctx.targets = {{"c", {5.0, 5.0}}};
  const auto f = CovariateFormula::bcrw(ctx.targets);
  const auto sets = build_choice_sets(tr, ctx, f, UniformScheme{}, 7, 1);
  std::ostringstream out;
  write_choice_sets_csv(out, sets, f.names());
  std::istringstream in(out.str());
  std::vector<std::string> names;
  const auto back = read_choice_sets_csv(in, &names);
  EXPECT_EQ(names, f.names());
  ASSERT_EQ(back.size(), sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EXPECT_EQ(back[i].time_index, sets[i].time_index);
    EXPECT_EQ(back[i].covariates, sets[i].covariates);
    EXPECT_EQ(back[i].distances, sets[i].distances);
    EXPECT_EQ(back[i].offsets, sets[i].offsets);
  }
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "t,alt_id,is_case,angle,distance,log_distance,neg_distance,cos_persistence,cos_target:c,offset");
}

TEST(BiasCorrection, AddsSamplingParameter) {
  const std::vector<Eigen::Vector2d> eta{{4.0, 0.43}, {0.0, 1.0}};
  const auto corrected = correct_parametric_bias(eta, Eigen::Vector2d(0.0, 1.0));
  EXPECT_DOUBLE_EQ(corrected[0](0), 4.0);
  EXPECT_DOUBLE_EQ(corrected[0](1), 1.43);
  EXPECT_DOUBLE_EQ(corrected[1](1), 2.0);

  FitResult fit;
  fit.coefficient_names = {"cos_persistence", "log_distance", "neg_distance"};
  fit.state_params = {{Eigen::Vector3d(1.0, 4.0, 0.43)}};
  correct_fit_for_sampling(fit, UniformScheme{});
  EXPECT_DOUBLE_EQ(fit.state_params[0].beta(2), 0.43);
  correct_fit_for_sampling(fit, ParametricScheme{Eigen::Vector2d(0.0, 1.0)});
  EXPECT_DOUBLE_EQ(fit.state_params[0].beta(0), 1.0);
  EXPECT_DOUBLE_EQ(fit.state_params[0].beta(1), 4.0);
  EXPECT_DOUBLE_EQ(fit.state_params[0].beta(2), 1.43);
}
