#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chtwin {

// Decimal text with 17 significant digits; parses back to the identical double.
std::string format_double(double v);

// Strict parse of a full token as a finite double; throws ParseError.
double parse_double(std::string_view token);

std::vector<std::string> split(std::string_view line, char sep);

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so a failed
// write never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Minimal CSV reader: checks the header exactly, then returns numeric rows
// with the header's column count.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  std::string_view expected_header);

}  // namespace chtwin
