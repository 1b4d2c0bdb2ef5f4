#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace kgcounsel {

// Whole-file helpers; both throw Error(IoError) naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
void append_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace kgcounsel
