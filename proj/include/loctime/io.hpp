#pragma once

#include <charconv>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace loctime {

/// Shortest decimal string that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

/// Builds a CSV document: header row, LF line endings, round-trip decimals.
class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) text_ += ',';
      text_ += h;
      first = false;
    }
    text_ += '\n';
  }

  CsvWriter& field(double v) { return raw(format_double(v)); }
  CsvWriter& field(long long v) { return raw(std::to_string(v)); }
  CsvWriter& field(int v) { return raw(std::to_string(v)); }
  CsvWriter& field(std::size_t v) { return raw(std::to_string(v)); }
  CsvWriter& field(std::string_view v) { return raw(std::string(v)); }

  void end_row() {
    text_ += '\n';
    row_open_ = false;
  }

  const std::string& str() const noexcept { return text_; }

 private:
  CsvWriter& raw(const std::string& s) {
    if (row_open_) text_ += ',';
    text_ += s;
    row_open_ = true;
    return *this;
  }

  std::string text_;
  bool row_open_ = false;
};

/// Writes `contents` byte-for-byte, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace loctime
