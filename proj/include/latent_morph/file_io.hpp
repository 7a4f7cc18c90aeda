#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace latent_morph {

/// Whole file as bytes; throws ParseError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over `path`, so readers never
/// observe a partial file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace latent_morph
