#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <string>
#include <string_view>

namespace newsclick {

/// Writes through a sibling temp file and renames it over `path`, so readers
/// never observe a truncated file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

/// Opens `path` for reading or throws IoError naming it.
std::ifstream open_input(const std::filesystem::path& path);

/// 17 significant digits, locale-independent; parse_double(format_double(x)) == x.
std::string format_double(double value);
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

}  // namespace newsclick
