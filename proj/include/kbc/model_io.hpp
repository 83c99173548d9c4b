#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kbc/background.hpp"

namespace kbc {

// %.17g; round-trips every binary64 value.
std::string format_real(double value);
double parse_real(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

// A non-comment line split into its first word and the remainder.
struct Record {
    std::size_t line_number = 0;
    std::string key;
    std::string value;
};
std::vector<Record> parse_records(std::string_view content);
std::vector<std::string> split_words(std::string_view text);

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const BackgroundModel& model);
BackgroundModel parse_model(std::string_view content);

void write_model(const BackgroundModel& model, const std::filesystem::path& path);
BackgroundModel read_model(const std::filesystem::path& path);

// Replaces only the `bias` record; every other byte is preserved.
std::string replace_bias_record(std::string_view content, double bias);

// Writes through a sibling temporary file and renames over the target.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace kbc
