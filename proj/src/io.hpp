#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mfg::io {

// Fixed "%.17g" rendering so identical runs emit byte-identical CSVs.
std::string fmt(double v);

std::string join_csv_row(const std::vector<std::string>& cells);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// Creates `base`, or `base_1`, `base_2`, ... if it already exists and is
// non-empty. Prior run directories are never mutated.
std::filesystem::path create_run_dir(const std::filesystem::path& base);

std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

} // namespace mfg::io
