#pragma once

#include <string>
#include <string_view>

namespace lexstab {

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Whole file as a string; throws IoError if it cannot be read.
std::string read_file(const std::string& path);

/// Writes atomically enough for our purposes (truncate + write); throws IoError.
void write_file(const std::string& path, std::string_view contents);

}  // namespace lexstab
