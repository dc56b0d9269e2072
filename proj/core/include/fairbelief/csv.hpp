#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fairbelief::csv {

using Row = std::vector<std::string>;

/// RFC-4180 reader. Quoted fields may contain separators, doubled quotes and
/// line breaks. A trailing CR on each record is dropped.
class Reader {
 public:
  explicit Reader(std::istream& in, char separator = ',');

  /// Reads the next record. Returns false at end of input.
  bool next(Row& row);

  /// 1-based physical line on which the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  char separator_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Parses a whole file. Throws Error(MissingFile) if it cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path,
                           std::string_view module, char separator = ',');

std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace fairbelief::csv
