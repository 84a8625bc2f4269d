#include "mssf/io.hpp"

#include "mssf/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace mssf {

namespace {

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double to_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": cannot parse '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

std::vector<Point> read_points_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != "x,y") {
    throw Error(ErrorCode::Io, "trajectory CSV must start with the header 'x,y'");
  }
  std::vector<Point> pts;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 2) throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": expected x,y");
    pts.push_back({to_double(cells[0], line_no), to_double(cells[1], line_no)});
  }
  return pts;
}

void write_points_csv(std::ostream& out, std::span<const Point> points) {
  out << "x,y\n" << std::setprecision(17);
  for (const auto& p : points) out << p.x << ',' << p.y << '\n';
}

void write_states_csv(std::ostream& out, std::span<const int> step_states) {
  out << "t,true_state\n";
  for (std::size_t t = 0; t < step_states.size(); ++t) out << t << ',' << step_states[t] + 1 << '\n';
}

std::vector<int> read_states_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != "t,true_state") {
    throw Error(ErrorCode::Io, "state CSV must start with the header 't,true_state'");
  }
  std::vector<int> states;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 2) throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": expected t,true_state");
    states.push_back(static_cast<int>(to_double(cells[1], line_no)) - 1);
  }
  return states;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << contents;
}

LandscapeGrid load_landscape(const std::filesystem::path& header_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(header_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, "landscape header: " + std::string(e.what()));
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "origin" && key != "cell_size" && key != "legend" && key != "targets" && key != "classes") {
      throw Error(ErrorCode::Io, "landscape header: unknown key '" + key + "'");
    }
  }
  LandscapeGrid g;
  try {
    g.origin = {j.at("origin").at("x").get<double>(), j.at("origin").at("y").get<double>()};
    g.cell_size = j.at("cell_size").get<double>();
    for (const auto& [code, label] : j.at("legend").items()) g.legend[std::stoi(code)] = label.get<std::string>();
    if (j.contains("targets")) {
      for (const auto& [name, p] : j.at("targets").items()) {
        g.targets[name] = {p.at("x").get<double>(), p.at("y").get<double>()};
      }
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Io, "landscape header: " + std::string(e.what()));
  }
  if (!(g.cell_size > 0.0)) throw Error(ErrorCode::Io, "landscape cell_size must be positive");

  const std::filesystem::path csv_path = header_path.parent_path() / j.at("classes").get<std::string>();
  std::istringstream body(read_text_file(csv_path));
  std::vector<std::vector<std::int32_t>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(body, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    std::vector<std::int32_t> row;
    for (const auto& cell : split(line)) row.push_back(static_cast<std::int32_t>(to_double(cell, line_no)));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::Io, "landscape rows must have equal length");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw Error(ErrorCode::Io, "empty landscape raster");
  g.classes.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      g.classes(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return g;
}

void save_landscape(const LandscapeGrid& grid, const std::filesystem::path& header_path,
                    const std::string& classes_file_name) {
  nlohmann::ordered_json j;
  j["origin"] = {{"x", grid.origin.x}, {"y", grid.origin.y}};
  j["cell_size"] = grid.cell_size;
  nlohmann::ordered_json legend = nlohmann::ordered_json::object();
  for (const auto& [code, label] : grid.legend) legend[std::to_string(code)] = label;
  j["legend"] = legend;
  nlohmann::ordered_json targets = nlohmann::ordered_json::object();
  for (const auto& [name, p] : grid.targets) targets[name] = {{"x", p.x}, {"y", p.y}};
  j["targets"] = targets;
  j["classes"] = classes_file_name;
  write_text_file(header_path, j.dump(2) + "\n");

  std::ostringstream body;
  for (Eigen::Index r = 0; r < grid.classes.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.classes.cols(); ++c) {
      if (c > 0) body << ',';
      body << grid.classes(r, c);
    }
    body << '\n';
  }
  write_text_file(header_path.parent_path() / classes_file_name, body.str());
}

}  // namespace mssf
