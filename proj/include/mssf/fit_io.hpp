#pragma once

#include "mssf/types.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>

namespace mssf {

/// Estimates keyed by coefficient name and state, transition matrix, SEs
/// (null when withheld), log-likelihood and iteration counts.
nlohmann::ordered_json fit_to_json(const FitResult& fit);
/// Reads back the parameter part of fit_to_json (no posterior probabilities).
FitResult fit_from_json(const nlohmann::json& j);

/// `t,p_state1,...,p_stateK,decoded`; t is the step index of each row.
void write_smoothed_csv(std::ostream& out, const Eigen::MatrixXd& smoothed, std::span<const int> time_index);

}  // namespace mssf
