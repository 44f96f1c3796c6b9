#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace engage::csv {

/// One parsed data row plus the physical line it started on.
struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF and embedded newlines.
class Reader {
 public:
  Reader(std::istream& in, std::string source);

  /// Reads the header row. Returns false on an empty stream.
  bool read_header();
  const std::vector<std::string>& header() const { return header_; }

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
  /// Index of a required header column; throws ParseError when absent.
  int require(std::string_view name) const;

  bool next(Row& row);
  const std::string& source() const { return source_; }

 private:
  bool read_record(std::vector<std::string>& fields, std::size_t& start_line);

  std::istream& in_;
  std::string source_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

/// Quotes a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text, const std::string& source, std::size_t line,
                    std::string_view column);
long long parse_int(std::string_view text, const std::string& source, std::size_t line,
                    std::string_view column);

}  // namespace engage::csv
