#pragma once

#include "mssf/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mssf {

/// Trajectory CSV: header `x,y`, one location per row.
std::vector<Point> read_points_csv(std::istream& in);
void write_points_csv(std::ostream& out, std::span<const Point> points);

/// Sidecar `t,true_state`: t is the 0-based step index, states are 1-based.
void write_states_csv(std::ostream& out, std::span<const int> step_states);
std::vector<int> read_states_csv(std::istream& in);

/// JSON header (origin, cell_size, legend, targets, classes file) plus a
/// headerless CSV of class codes, row-major from the north-west corner.
LandscapeGrid load_landscape(const std::filesystem::path& header_path);
void save_landscape(const LandscapeGrid& grid, const std::filesystem::path& header_path,
                    const std::string& classes_file_name);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace mssf
