#include "mssf/sampler.hpp"

#include "mssf/circular.hpp"
#include "mssf/distance_family.hpp"
#include "mssf/errors.hpp"
#include "mssf/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace mssf {

std::string scheme_label(const SamplingScheme& scheme) {
  std::ostringstream os;
  os << std::setprecision(6);
  if (const auto* u = std::get_if<UniformScheme>(&scheme)) {
    os << "uniform(M=" << u->max_distance << ")";
  } else {
    const auto& p = std::get<ParametricScheme>(scheme);
    os << "parametric(eta=" << p.eta_tilde(0) << ";" << p.eta_tilde(1) << ")";
  }
  return os.str();
}

bool is_parametric(const SamplingScheme& scheme) {
  return std::holds_alternative<ParametricScheme>(scheme);
}

std::string CovariateTerm::name() const {
  switch (kind) {
    case TermKind::LogDistance: return "log_distance";
    case TermKind::NegDistance: return "neg_distance";
    case TermKind::CosPersistence: return "cos_persistence";
    case TermKind::CosTarget: return "cos_target:" + target;
    case TermKind::Landcover: return "landcover:" + label;
  }
  return {};
}

CovariateTerm CovariateTerm::parse(const std::string& name) {
  if (name == "log_distance") return {TermKind::LogDistance, {}, {}};
  if (name == "neg_distance") return {TermKind::NegDistance, {}, {}};
  if (name == "cos_persistence") return {TermKind::CosPersistence, {}, {}};
  const auto colon = name.find(':');
  if (colon != std::string::npos && colon + 1 < name.size()) {
    const std::string head = name.substr(0, colon);
    const std::string tail = name.substr(colon + 1);
    if (head == "cos_target") return {TermKind::CosTarget, tail, {}};
    if (head == "landcover") return {TermKind::Landcover, {}, tail};
  }
  throw Error(ErrorCode::Config, "unknown covariate term '" + name + "'");
}

std::vector<std::string> CovariateFormula::names() const {
  std::vector<std::string> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(t.name());
  return out;
}

std::optional<Eigen::Index> CovariateFormula::index_of(TermKind kind) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].kind == kind) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

bool CovariateFormula::needs_landscape() const {
  for (const auto& t : terms) {
    if (t.kind == TermKind::Landcover) return true;
  }
  return false;
}

CovariateFormula CovariateFormula::bcrw(std::span<const Target> targets) {
  CovariateFormula f;
  f.terms = {{TermKind::LogDistance, {}, {}}, {TermKind::NegDistance, {}, {}}, {TermKind::CosPersistence, {}, {}}};
  for (const auto& tg : targets) f.terms.push_back({TermKind::CosTarget, tg.name, {}});
  return f;
}

Point CovariateContext::target(const std::string& name) const {
  for (const auto& tg : targets) {
    if (tg.name == name) return tg.location;
  }
  if (landscape != nullptr) {
    if (auto it = landscape->targets.find(name); it != landscape->targets.end()) return it->second;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown target '" + name + "'");
}

std::vector<Step> sample_controls(Rng& rng, const SamplingScheme& scheme, int num_controls) {
  if (num_controls < 1) throw Error(ErrorCode::InvalidArgument, "need at least one control");
  std::vector<Step> out(static_cast<std::size_t>(num_controls));
  if (const auto* u = std::get_if<UniformScheme>(&scheme)) {
    for (auto& s : out) {
      s.angle = uniform_angle(rng);
      s.distance = u->max_distance * uniform_open(rng);
    }
  } else {
    const GammaParams law = natural_to_gamma(std::get<ParametricScheme>(scheme).eta_tilde);
    for (auto& s : out) {
      s.angle = uniform_angle(rng);
      do {
        s.distance = gamma_sample(rng, law);
      } while (!(s.distance > 0.0));
    }
  }
  return out;
}

namespace {

struct ResolvedTerm {
  TermKind kind;
  double target_bearing{};
  std::int32_t code{};
};

}  // namespace

ChoiceSet build_choice_set(int time_index, const Step& observed, std::span<const Step> controls,
                           double prev_angle, const Point& origin, const CovariateContext& context,
                           const CovariateFormula& formula, const SamplingScheme& scheme) {
  if (formula.needs_landscape() && context.landscape == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "land-cover covariates need a landscape");
  }
  std::vector<ResolvedTerm> resolved;
  resolved.reserve(formula.terms.size());
  for (const auto& term : formula.terms) {
    ResolvedTerm r{term.kind};
    if (term.kind == TermKind::CosTarget) r.target_bearing = bearing(origin, context.target(term.target));
    if (term.kind == TermKind::Landcover) r.code = context.landscape->code_for(term.label);
    resolved.push_back(r);
  }

  std::vector<Step> alts;
  alts.reserve(controls.size() + 1);
  alts.push_back(observed);
  const bool landcover = formula.needs_landscape();
  for (const auto& c : controls) {
    if (landcover && !context.landscape->contains(advance(origin, c.angle, c.distance))) continue;
    alts.push_back(c);
  }
  if (landcover && !context.landscape->contains(advance(origin, observed.angle, observed.distance))) {
    throw Error(ErrorCode::OutOfGrid, "observed endpoint of step " + std::to_string(time_index) +
                                          " lies outside the landscape");
  }

  const auto n = static_cast<Eigen::Index>(alts.size());
  const auto r = static_cast<Eigen::Index>(resolved.size());
  ChoiceSet cs;
  cs.time_index = time_index;
  cs.angles.resize(n);
  cs.distances.resize(n);
  cs.offsets.resize(n);
  cs.covariates.resize(n, r);
  const bool uniform = !is_parametric(scheme);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Step& s = alts[static_cast<std::size_t>(j)];
    cs.angles(j) = s.angle;
    cs.distances(j) = s.distance;
    cs.offsets(j) = uniform ? gamma_family().log_base_measure(s.distance) : 0.0;
    std::int32_t cls = 0;
    if (landcover) cls = context.landscape->class_at(advance(origin, s.angle, s.distance));
    for (Eigen::Index i = 0; i < r; ++i) {
      const ResolvedTerm& term = resolved[static_cast<std::size_t>(i)];
      double v = 0.0;
      switch (term.kind) {
        case TermKind::LogDistance: v = std::log(s.distance); break;
        case TermKind::NegDistance: v = -s.distance; break;
        case TermKind::CosPersistence: v = std::cos(s.angle - prev_angle); break;
        case TermKind::CosTarget: v = std::cos(s.angle - term.target_bearing); break;
        case TermKind::Landcover: v = cls == term.code ? 1.0 : 0.0; break;
      }
      cs.covariates(j, i) = v;
    }
  }
  return cs;
}

std::vector<ChoiceSet> build_choice_sets(const Trajectory& trajectory, const CovariateContext& context,
                                         const CovariateFormula& formula, const SamplingScheme& scheme,
                                         int num_controls, std::uint64_t seed) {
  std::vector<ChoiceSet> sets;
  const Eigen::Index n = trajectory.num_steps();
  sets.reserve(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)));
  for (Eigen::Index t = 1; t < n; ++t) {
    Rng rng = make_rng(seed, "controls", static_cast<std::uint64_t>(t));
    const std::vector<Step> controls = sample_controls(rng, scheme, num_controls);
    sets.push_back(build_choice_set(static_cast<int>(t), trajectory.step(t), controls, trajectory.angles(t - 1),
                                    trajectory.points[static_cast<std::size_t>(t)], context, formula, scheme));
  }
  return sets;
}

std::vector<Eigen::Vector2d> correct_parametric_bias(std::span<const Eigen::Vector2d> eta_ssf,
                                                     const Eigen::Vector2d& eta_tilde) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(eta_ssf.size());
  for (const auto& e : eta_ssf) out.emplace_back(e + eta_tilde);
  return out;
}

void write_choice_sets_csv(std::ostream& out, std::span<const ChoiceSet> sets,
                           const std::vector<std::string>& covariate_names) {
  out << "t,alt_id,is_case,angle,distance";
  for (const auto& n : covariate_names) out << ',' << n;
  out << ",offset\n";
  out << std::setprecision(17);
  for (const auto& cs : sets) {
    if (cs.dimension() != static_cast<Eigen::Index>(covariate_names.size())) {
      throw Error(ErrorCode::InvalidArgument, "covariate names do not match the choice-set dimension");
    }
    for (Eigen::Index j = 0; j < cs.num_alternatives(); ++j) {
      out << cs.time_index << ',' << j << ',' << (j == 0 ? 1 : 0) << ',' << cs.angles(j) << ','
          << cs.distances(j);
      for (Eigen::Index i = 0; i < cs.dimension(); ++i) out << ',' << cs.covariates(j, i);
      out << ',' << cs.offsets(j) << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

std::vector<ChoiceSet> read_choice_sets_csv(std::istream& in, std::vector<std::string>* covariate_names) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty choice-set file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 6 || header[0] != "t" || header[1] != "alt_id" || header[2] != "is_case" ||
      header[3] != "angle" || header[4] != "distance" || header.back() != "offset") {
    throw Error(ErrorCode::Io, "choice-set header must be t,alt_id,is_case,angle,distance,...,offset");
  }
  const std::size_t r = header.size() - 6;
  if (covariate_names != nullptr) covariate_names->assign(header.begin() + 5, header.end() - 1);

  struct Row {
    double angle, distance, offset;
    std::vector<double> x;
  };
  std::vector<ChoiceSet> sets;
  std::vector<Row> rows;
  int current_t = 0;
  auto flush = [&]() {
    if (rows.empty()) return;
    ChoiceSet cs;
    cs.time_index = current_t;
    const auto n = static_cast<Eigen::Index>(rows.size());
    cs.angles.resize(n);
    cs.distances.resize(n);
    cs.offsets.resize(n);
    cs.covariates.resize(n, static_cast<Eigen::Index>(r));
    for (Eigen::Index j = 0; j < n; ++j) {
      const Row& row = rows[static_cast<std::size_t>(j)];
      cs.angles(j) = row.angle;
      cs.distances(j) = row.distance;
      cs.offsets(j) = row.offset;
      for (std::size_t i = 0; i < r; ++i) cs.covariates(j, static_cast<Eigen::Index>(i)) = row.x[i];
    }
    sets.push_back(std::move(cs));
    rows.clear();
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": wrong number of columns");
    }
    const int t = static_cast<int>(parse_double(cells[0], line_no));
    const int alt = static_cast<int>(parse_double(cells[1], line_no));
    const int is_case = static_cast<int>(parse_double(cells[2], line_no));
    if (!rows.empty() && t != current_t) flush();
    if (rows.empty()) {
      current_t = t;
      if (alt != 0 || is_case != 1) {
        throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": each stratum must start with its case");
      }
    } else if (is_case != 0) {
      throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": more than one case in a stratum");
    }
    Row row{parse_double(cells[3], line_no), parse_double(cells[4], line_no),
            parse_double(cells.back(), line_no), {}};
    row.x.reserve(r);
    for (std::size_t i = 0; i < r; ++i) row.x.push_back(parse_double(cells[5 + i], line_no));
    rows.push_back(std::move(row));
  }
  flush();
  return sets;
}

}  // namespace mssf

namespace mssf {

void correct_fit_for_sampling(FitResult& fit, const SamplingScheme& scheme) {
  const auto* p = std::get_if<ParametricScheme>(&scheme);
  if (p == nullptr) return;
  const auto& names = fit.coefficient_names;
  const auto ilog = std::find(names.begin(), names.end(), "log_distance");
  const auto ineg = std::find(names.begin(), names.end(), "neg_distance");
  if (ilog == names.end() || ineg == names.end()) return;
  const auto a = static_cast<Eigen::Index>(ilog - names.begin());
  const auto b = static_cast<Eigen::Index>(ineg - names.begin());
  std::vector<Eigen::Vector2d> eta;
  for (const auto& s : fit.state_params) eta.emplace_back(s.beta(a), s.beta(b));
  const auto corrected = correct_parametric_bias(eta, p->eta_tilde);
  for (std::size_t k = 0; k < fit.state_params.size(); ++k) {
    fit.state_params[k].beta(a) = corrected[k](0);
    fit.state_params[k].beta(b) = corrected[k](1);
  }
}

}  // namespace mssf
