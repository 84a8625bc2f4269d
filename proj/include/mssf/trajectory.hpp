#pragma once

#include "mssf/types.hpp"

#include <span>

namespace mssf {

/// Polar decomposition of consecutive locations. Requires at least 3 points
/// and no zero-length step (throws DuplicateConsecutivePoints).
Trajectory derive_steps(std::span<const Point> points);

/// Inverse of derive_steps: rebuild locations from a start and step list.
std::vector<Point> reconstruct_points(const Point& start, const Eigen::VectorXd& angles,
                                      const Eigen::VectorXd& distances);

/// Heading from `from` to `to`, in (-pi, pi].
double bearing(const Point& from, const Point& to);

Point advance(const Point& from, double angle, double distance);

}  // namespace mssf
