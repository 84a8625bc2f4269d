#include "mssf/types.hpp"

#include "mssf/errors.hpp"

#include <cmath>

namespace mssf {

HmmParams HmmParams::uniform(Eigen::Index k) {
  HmmParams h;
  h.transition = Eigen::MatrixXd::Constant(k, k, 1.0 / static_cast<double>(k));
  h.initial = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  return h;
}

void HmmParams::validate() const {
  const auto k = transition.rows();
  if (k < 1 || transition.cols() != k || initial.size() != k) {
    throw Error(ErrorCode::InvalidArgument, "transition must be K x K and initial of length K");
  }
  auto is_probability = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  for (Eigen::Index h = 0; h < k; ++h) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!is_probability(transition(h, j))) {
        throw Error(ErrorCode::InvalidArgument, "transition entries must lie in [0, 1]");
      }
    }
    if (std::abs(transition.row(h).sum() - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "transition rows must sum to 1");
    }
    if (!is_probability(initial(h))) {
      throw Error(ErrorCode::InvalidArgument, "initial entries must lie in [0, 1]");
    }
  }
  if (std::abs(initial.sum() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "initial distribution must sum to 1");
  }
}

bool LandscapeGrid::contains(const Point& p) const {
  const double width = cell_size * static_cast<double>(classes.cols());
  const double height = cell_size * static_cast<double>(classes.rows());
  return p.x >= origin.x && p.y >= origin.y && p.x < origin.x + width && p.y < origin.y + height;
}

std::int32_t LandscapeGrid::class_at(const Point& p) const {
  if (!contains(p)) {
    throw Error(ErrorCode::OutOfGrid, "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                          ") lies outside the landscape");
  }
  const auto col = static_cast<Eigen::Index>(std::floor((p.x - origin.x) / cell_size));
  const auto row_from_south = static_cast<Eigen::Index>(std::floor((p.y - origin.y) / cell_size));
  // floor can land on the upper edge through rounding
  const Eigen::Index c = std::min(col, classes.cols() - 1);
  const Eigen::Index r = classes.rows() - 1 - std::min(row_from_south, classes.rows() - 1);
  return classes(r, c);
}

std::int32_t LandscapeGrid::code_for(const std::string& label) const {
  for (const auto& [code, name] : legend) {
    if (name == label) return code;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown land-cover label '" + label + "'");
}

}  // namespace mssf
