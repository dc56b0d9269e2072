#include "fairbelief/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "fairbelief/error.hpp"

namespace fairbelief::csv {

Reader::Reader(std::istream& in, char separator) : in_(in), separator_(separator) {}

bool Reader::next(Row& row) {
  row.clear();
  std::string line;
  if (!std::getline(in_, line)) return false;
  ++line_;
  record_line_ = line_;

  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  for (;;) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"' && field.empty() && !field_was_quoted) {
        in_quotes = true;
        field_was_quoted = true;
      } else if (c == separator_) {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else {
        field += c;
      }
    }
    if (!in_quotes) break;
    // Quoted field spans a line break.
    if (!std::getline(in_, line)) break;
    ++line_;
    field += '\n';
  }
  row.push_back(std::move(field));
  return true;
}

std::vector<Row> read_file(const std::filesystem::path& path, std::string_view module,
                           char separator) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, module, path.string());
  Reader reader(in, separator);
  std::vector<Row> rows;
  Row row;
  while (reader.next(row)) rows.push_back(row);
  return rows;
}

std::string escape(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << "\r\n";
}

}  // namespace fairbelief::csv
