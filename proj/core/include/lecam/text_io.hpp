#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lecam {

/// Formats a double with 17 significant digits, enough to round-trip any
/// IEEE-754 binary64 value through text.
std::string format_double(double v);

/// FNV-1a 64-bit hash of a text blob; used for content-addressed run dirs.
std::uint64_t fnv1a64(const std::string& text);

std::string hex16(std::uint64_t v);

/// Splits one CSV line on commas. No quoting support; the formats in this
/// project are plain numeric CSV.
std::vector<std::string> split_csv_line(const std::string& line);

bool parse_double(const std::string& s, double& out);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace lecam
