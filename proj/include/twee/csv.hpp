#pragma once

#include <string>
#include <vector>

#include "twee/linalg.hpp"

namespace twee {

/// Comma-separated numeric table, rows are observations. Errors are
/// ParseErrors of the form "path:line:column: message".
DataMatrix read_csv_matrix(const std::string& path, bool has_header = true);
DataMatrix parse_csv_matrix(const std::string& text, const std::string& source, bool has_header = true);

/// Single-column label file (e.g. MANOVA groups), one label per row.
std::vector<std::string> read_csv_labels(const std::string& path, bool has_header = true);
std::vector<std::string> parse_csv_labels(const std::string& text, const std::string& source, bool has_header = true);

std::string read_file(const std::string& path);

}  // namespace twee
