#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rda::io {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

/// FNV-1a 64-bit, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

/// Accumulates a CSV file in memory. Every file starts with a comment
/// header carrying the config hash so `rda-wave check` can verify it.
class CsvWriter {
public:
    CsvWriter(std::string config_hash, std::vector<std::string> columns);

    void comment(std::string_view line);
    void row(const std::vector<double>& values);
    /// Row where some cells are intentionally blank (NaN is written as "").
    void row_with_blanks(const std::vector<double>& values);

    const std::string& text() const { return text_; }
    void save(const std::filesystem::path& file) const;

private:
    std::size_t ncols_;
    std::string text_;
    bool header_done_ = false;
    std::vector<std::string> columns_;
    void finish_header();
};

void write_text_file(const std::filesystem::path& file, std::string_view text);
std::string read_text_file(const std::filesystem::path& file);

}  // namespace rda::io
