#include "mssf/errors.hpp"
#include "mssf/io.hpp"
#include "mssf/random.hpp"
#include "mssf/trajectory.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <sstream>

using namespace mssf;

TEST(Trajectory, ThreePointExample) {
  const std::vector<Point> pts{{0, 0}, {1, 0}, {1, 1}};
  const Trajectory tr = derive_steps(pts);
  ASSERT_EQ(tr.num_steps(), 2);
  EXPECT_DOUBLE_EQ(tr.angles(0), 0.0);
  EXPECT_DOUBLE_EQ(tr.distances(0), 1.0);
  EXPECT_NEAR(tr.angles(1), std::numbers::pi / 2, 1e-15);
  EXPECT_DOUBLE_EQ(tr.distances(1), 1.0);
}

TEST(Trajectory, HeadingsInHalfOpenInterval) {
  const std::vector<Point> pts{{0, 0}, {-1, 0}, {-1, -1e-300}, {-2, -1}};
  const Trajectory tr = derive_steps(pts);
  EXPECT_DOUBLE_EQ(tr.angles(0), std::numbers::pi);
  for (Eigen::Index t = 0; t < tr.num_steps(); ++t) {
    EXPECT_GT(tr.angles(t), -std::numbers::pi);
    EXPECT_LE(tr.angles(t), std::numbers::pi);
  }
}

TEST(Trajectory, DuplicateConsecutivePointsRejected) {
  const std::vector<Point> pts{{0, 0}, {1, 1}, {1, 1}, {2, 2}};
  try {
    derive_steps(pts);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateConsecutivePoints);
  }
}

TEST(Trajectory, TooShortRejected) {
  const std::vector<Point> pts{{0, 0}, {1, 1}};
  EXPECT_THROW(derive_steps(pts), Error);
}

TEST(Trajectory, ReconstructionRoundTrip) {
  Rng rng(3);
  std::vector<Point> pts{{5.0, -2.0}};
  for (int i = 0; i < 200; ++i) {
    pts.push_back({pts.back().x + 3.0 * standard_normal(rng), pts.back().y + 3.0 * standard_normal(rng)});
  }
  const Trajectory tr = derive_steps(pts);
  const auto back = reconstruct_points(pts.front(), tr.angles, tr.distances);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(back[i].x, pts[i].x, 1e-9);
    EXPECT_NEAR(back[i].y, pts[i].y, 1e-9);
  }
}

TEST(Random, DerivedSeedsDependOnStreamAndIndex) {
  EXPECT_EQ(derive_seed(1, "simulate", 0), derive_seed(1, "simulate", 0));
  EXPECT_NE(derive_seed(1, "simulate", 0), derive_seed(1, "simulate", 1));
  EXPECT_NE(derive_seed(1, "simulate", 0), derive_seed(1, "controls", 0));
  EXPECT_NE(derive_seed(1, "simulate", 0), derive_seed(2, "simulate", 0));
}

TEST(Random, UniformOpenNeverHitsEndpoints) {
  Rng rng(11);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_open(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(HmmParamsTest, Validation) {
  HmmParams h = HmmParams::uniform(3);
  EXPECT_NO_THROW(h.validate());
  h.transition(0, 0) += 1e-9;
  EXPECT_THROW(h.validate(), Error);
  h = HmmParams::uniform(2);
  h.initial(0) = -0.1;
  h.initial(1) = 1.1;
  EXPECT_THROW(h.validate(), Error);
}

TEST(Io, PointsCsvRoundTripIsExact) {
  const std::vector<Point> pts{{0.1, 1.0 / 3.0}, {-2.5e-7, 1e6 + 0.123456789}, {std::numbers::pi, -std::numbers::e}};
  std::ostringstream out;
  write_points_csv(out, pts);
  std::istringstream in(out.str());
  const auto back = read_points_csv(in);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back[i].x, pts[i].x);
    EXPECT_EQ(back[i].y, pts[i].y);
  }
}

TEST(Io, StatesCsvIsOneBased) {
  const std::vector<int> states{0, 1, 1, 0};
  std::ostringstream out;
  write_states_csv(out, states);
  EXPECT_EQ(out.str(), "t,true_state\n0,1\n1,2\n2,2\n3,1\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_states_csv(in), states);
}

TEST(Io, MalformedPointsRejected) {
  std::istringstream in("x,y\n1,2\n3\n");
  EXPECT_THROW(read_points_csv(in), Error);
}

TEST(Landscape, CellLookupAndRoundTrip) {
  LandscapeGrid g;
  g.origin = {10.0, 20.0};
  g.cell_size = 2.0;
  g.classes.resize(2, 3);
  g.classes << 1, 2, 3,  // north row
      4, 5, 6;
  g.legend = {{1, "meadow"}, {2, "forest"}, {3, "water"}, {4, "meadow"}, {5, "forest"}, {6, "rock"}};
  g.targets = {{"den", {12.0, 21.0}}};
  EXPECT_EQ(g.class_at({10.5, 20.5}), 4);  // south-west cell
  EXPECT_EQ(g.class_at({15.9, 23.9}), 3);  // north-east cell
  EXPECT_TRUE(g.contains({10.0, 20.0}));
  EXPECT_FALSE(g.contains({16.0, 21.0}));
  try {
    g.class_at({9.99, 21.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfGrid);
  }

  const auto dir = mssf::testing::fresh_dir("landscape");
  save_landscape(g, dir / "grid.json", "grid_classes.csv");
  const LandscapeGrid back = load_landscape(dir / "grid.json");
  EXPECT_EQ(back.classes, g.classes);
  EXPECT_EQ(back.legend, g.legend);
  EXPECT_DOUBLE_EQ(back.cell_size, 2.0);
  EXPECT_DOUBLE_EQ(back.targets.at("den").y, 21.0);
}

TEST(Landscape, UnknownHeaderKeyRejected) {
  const auto dir = mssf::testing::fresh_dir("landscape_bad");
  std::ofstream(dir / "c.csv") << "1,2\n3,4\n";
  std::ofstream(dir / "g.json")
      << R"({"origin":[0,0],"cell_size":1,"legend":{"1":"a"},"classes":"c.csv","colour":"red"})";
  EXPECT_THROW(load_landscape(dir / "g.json"), Error);
}
