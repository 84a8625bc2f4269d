#include "mssf/fit_io.hpp"

#include "mssf/errors.hpp"
#include "mssf/hmm.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace mssf {

namespace {

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number_or_null(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
      m(r, c) = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    }
  }
  return m;
}

}  // namespace

nlohmann::ordered_json fit_to_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["format"] = "mssf-fit";
  j["version"] = 1;
  j["num_states"] = fit.state_params.size();
  j["coefficients"] = fit.coefficient_names;
  nlohmann::ordered_json states = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < fit.state_params.size(); ++k) {
    nlohmann::ordered_json s;
    s["state"] = k + 1;
    nlohmann::ordered_json est;
    nlohmann::ordered_json se;
    for (std::size_t i = 0; i < fit.coefficient_names.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      est[fit.coefficient_names[i]] = fit.state_params[k].beta(ii);
      const bool have = fit.beta_std_errors.rows() > static_cast<Eigen::Index>(k);
      se[fit.coefficient_names[i]] =
          number_or_null(have ? fit.beta_std_errors(static_cast<Eigen::Index>(k), ii)
                              : std::numeric_limits<double>::quiet_NaN());
    }
    s["estimates"] = est;
    s["std_errors"] = se;
    states.push_back(s);
  }
  j["states"] = states;
  j["transition"] = matrix_json(fit.hmm.transition);
  j["transition_std_errors"] = matrix_json(fit.transition_std_errors);
  j["initial"] = std::vector<double>(fit.hmm.initial.data(), fit.hmm.initial.data() + fit.hmm.initial.size());
  j["loglik"] = fit.loglik;
  j["n_em_iterations"] = fit.n_em_iterations;
  j["converged"] = fit.converged;
  j["std_errors_ok"] = fit.std_errors_ok;
  j["min_loglik_increment"] = fit.min_loglik_increment;
  j["loglik_trace"] = fit.loglik_trace;
  j["warnings"] = fit.warnings;
  return j;
}

FitResult fit_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "mssf-fit") throw Error(ErrorCode::Io, "not a fit result");
    FitResult fit;
    fit.coefficient_names = j.at("coefficients").get<std::vector<std::string>>();
    const auto r = static_cast<Eigen::Index>(fit.coefficient_names.size());
    for (const auto& s : j.at("states")) {
      StateParams sp;
      sp.beta.resize(r);
      for (Eigen::Index i = 0; i < r; ++i) {
        sp.beta(i) = s.at("estimates").at(fit.coefficient_names[static_cast<std::size_t>(i)]).get<double>();
      }
      fit.state_params.push_back(sp);
    }
    fit.hmm.transition = matrix_from_json(j.at("transition"));
    const auto init = j.at("initial").get<std::vector<double>>();
    fit.hmm.initial = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(init.size()));
    fit.transition_std_errors = matrix_from_json(j.at("transition_std_errors"));
    fit.loglik = j.at("loglik").get<double>();
    fit.n_em_iterations = j.at("n_em_iterations").get<int>();
    fit.converged = j.at("converged").get<bool>();
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, std::string("fit result JSON: ") + e.what());
  }
}

void write_smoothed_csv(std::ostream& out, const Eigen::MatrixXd& smoothed, std::span<const int> time_index) {
  out << 't';
  for (Eigen::Index k = 0; k < smoothed.cols(); ++k) out << ",p_state" << k + 1;
  out << ",decoded\n" << std::setprecision(17);
  const auto decoded = decode_states(smoothed);
  for (Eigen::Index t = 0; t < smoothed.rows(); ++t) {
    out << time_index[static_cast<std::size_t>(t)];
    for (Eigen::Index k = 0; k < smoothed.cols(); ++k) out << ',' << smoothed(t, k);
    out << ',' << decoded[static_cast<std::size_t>(t)].state + 1 << '\n';
  }
}

}  // namespace mssf
