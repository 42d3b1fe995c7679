#pragma once

#include <string>

namespace lagid {

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);
[[nodiscard]] std::string read_file(const std::string& path);

// %.17g: round-trips any double.
[[nodiscard]] std::string format_double(double value);

} // namespace lagid
