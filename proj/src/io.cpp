#include "rda/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rda::io {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

CsvWriter::CsvWriter(std::string config_hash, std::vector<std::string> columns)
    : ncols_(columns.size()), columns_(std::move(columns)) {
    text_ = "# config_hash=" + config_hash + "\n";
}

void CsvWriter::comment(std::string_view line) {
    if (header_done_) throw std::logic_error("CsvWriter: comments must precede rows");
    text_ += "# ";
    text_ += line;
    text_ += '\n';
}

void CsvWriter::finish_header() {
    if (header_done_) return;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) text_ += ',';
        text_ += columns_[i];
    }
    text_ += '\n';
    header_done_ = true;
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncols_) throw std::invalid_argument("CsvWriter: row width mismatch");
    finish_header();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) text_ += ',';
        text_ += format_double(values[i]);
    }
    text_ += '\n';
}

void CsvWriter::row_with_blanks(const std::vector<double>& values) {
    if (values.size() != ncols_) throw std::invalid_argument("CsvWriter: row width mismatch");
    finish_header();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) text_ += ',';
        if (!std::isnan(values[i])) text_ += format_double(values[i]);
    }
    text_ += '\n';
}

void CsvWriter::save(const std::filesystem::path& file) const {
    CsvWriter copy = *this;
    copy.finish_header();
    write_text_file(file, copy.text_);
}

void write_text_file(const std::filesystem::path& file, std::string_view text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace rda::io
