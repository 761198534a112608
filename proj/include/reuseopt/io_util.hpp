#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace reuseopt {

/// Throws Error{Io} if the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal text that parses back to the same double.
std::string format_exact(double value);

/// Four significant digits, used for report tables.
std::string format_sig4(double value);

}  // namespace reuseopt
