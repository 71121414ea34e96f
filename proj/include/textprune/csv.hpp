// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textprune::csv {

/// One parsed record plus the 1-based line it started on (quoted fields may
/// span lines, so the record line is the anchor for error reporting).
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// Strict RFC-4180 reader: quoted fields, doubled-quote escapes, CRLF or LF
/// record ends. Structural problems (stray or unterminated quote) throw
/// DataError naming the line.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  bool at_start_ = true;
};

/// Field with RFC-4180 minimal quoting: quoted only when it contains a comma,
/// quote, CR, or LF; embedded quotes doubled.
std::string escape_field(std::string_view field);

}  // namespace textprune::csv
