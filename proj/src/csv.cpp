// SPDX-License-Identifier: Apache-2.0
#include "textprune/csv.hpp"

#include <string>

#include "textprune/errors.hpp"

namespace textprune::csv {

std::optional<Record> Reader::next() {
  int c = in_.get();
  if (c == std::istream::traits_type::eof()) return std::nullopt;

  // Tolerate a UTF-8 BOM on the very first record.
  if (at_start_) {
    at_start_ = false;
    if (c == 0xEF && in_.peek() == 0xBB) {
      in_.get();
      if (in_.peek() == 0xBF) {
        in_.get();
        c = in_.get();
        if (c == std::istream::traits_type::eof()) return std::nullopt;
      } else {
        throw DataError("line 1: invalid byte sequence at start of file");
      }
    }
  }

  Record rec;
  rec.line = line_;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool field_was_quoted = false;

  auto push_field = [&] {
    rec.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
    field_was_quoted = false;
  };

  while (true) {
    if (in_quotes) {
      if (c == std::istream::traits_type::eof()) {
        throw DataError("line " + std::to_string(rec.line) +
                        ": unterminated quoted field");
      }
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(static_cast<char>(c));
      }
    } else {
      if (c == std::istream::traits_type::eof()) {
        push_field();
        return rec;
      }
      if (c == '"') {
        if (field_was_quoted) {
          throw DataError("line " + std::to_string(line_) +
                          ": content after closing quote");
        }
        if (field_started) {
          throw DataError("line " + std::to_string(line_) +
                          ": unexpected quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        field_was_quoted = true;
      } else if (c == ',') {
        push_field();
      } else if (c == '\n') {
        ++line_;
        push_field();
        return rec;
      } else if (c == '\r') {
        if (in_.peek() == '\n') in_.get();
        ++line_;
        push_field();
        return rec;
      } else {
        if (field_was_quoted) {
          throw DataError("line " + std::to_string(line_) +
                          ": content after closing quote");
        }
        field.push_back(static_cast<char>(c));
        field_started = true;
      }
    }
    c = in_.get();
  }
}

std::string escape_field(std::string_view field) {
  const bool needs_quoting =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quoting) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace textprune::csv
