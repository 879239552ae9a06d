#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tollcast::csv {

/// One parsed record and the 1-based physical line it started on.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Streaming RFC-4180 reader: comma separated, double-quote quoting with ""
/// escapes, quoted fields may span lines, CRLF or LF endings.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws std::runtime_error on an
  /// unterminated quoted field.
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

/// Quotes a field only when it contains a comma, quote, or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace tollcast::csv
