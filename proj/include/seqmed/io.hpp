#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace seqmed {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Splits a comma-separated line into doubles; `source` and `row` label errors.
std::vector<double> parse_numeric_fields(std::string_view line, const std::string& source, long row);

/// Writes to a temporary sibling file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace seqmed
