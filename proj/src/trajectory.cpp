#include "mssf/trajectory.hpp"

#include "mssf/circular.hpp"
#include "mssf/errors.hpp"

#include <cmath>
#include <string>

namespace mssf {

double bearing(const Point& from, const Point& to) {
  return wrap_angle(std::atan2(to.y - from.y, to.x - from.x));
}

Point advance(const Point& from, double angle, double distance) {
  return {from.x + distance * std::cos(angle), from.y + distance * std::sin(angle)};
}

Trajectory derive_steps(std::span<const Point> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "a trajectory needs at least 3 points");
  }
  Trajectory traj;
  traj.points.assign(points.begin(), points.end());
  const auto n = static_cast<Eigen::Index>(points.size()) - 1;
  traj.angles.resize(n);
  traj.distances.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Point& a = points[static_cast<std::size_t>(t)];
    const Point& b = points[static_cast<std::size_t>(t) + 1];
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(b.x) || !std::isfinite(b.y)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite coordinate at step " + std::to_string(t));
    }
    const double d = std::hypot(b.x - a.x, b.y - a.y);
    if (!(d > 0.0)) {
      throw Error(ErrorCode::DuplicateConsecutivePoints,
                  "points " + std::to_string(t) + " and " + std::to_string(t + 1) + " coincide");
    }
    traj.angles(t) = bearing(a, b);
    traj.distances(t) = d;
  }
  return traj;
}

std::vector<Point> reconstruct_points(const Point& start, const Eigen::VectorXd& angles,
                                      const Eigen::VectorXd& distances) {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(angles.size()) + 1);
  pts.push_back(start);
  for (Eigen::Index t = 0; t < angles.size(); ++t) {
    pts.push_back(advance(pts.back(), angles(t), distances(t)));
  }
  return pts;
}

}  // namespace mssf
