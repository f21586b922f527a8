#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "denslice/error.hpp"

namespace denslice {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180: comma-separated, optional CRLF line ends, double-quoted fields
// with "" escapes. The first record is the header.
inline CsvTable parse_csv(const std::string& text) {
  CsvTable out;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool any_field = false;

  std::size_t i = 0;
  // strip a UTF-8 BOM
  if (text.size() >= 3 && text[0] == '\xef' && text[1] == '\xbb' && text[2] == '\xbf') i = 3;

  auto end_field = [&]() {
    record.push_back(field);
    field.clear();
    field_was_quoted = false;
    any_field = true;
  };
  auto end_record = [&]() {
    end_field();
    if (out.header.empty())
      out.header = record;
    else
      out.rows.push_back(record);
    record.clear();
    any_field = false;
  };

  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted)
          fail(errc::parse_error, "stray quote inside unquoted field");
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) fail(errc::parse_error, "unterminated quoted field");
  if (!field.empty() || field_was_quoted || any_field) end_record();
  if (out.header.empty()) fail(errc::parse_error, "empty CSV input");
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(errc::io_error, "write failed for '" + path + "'");
}

inline CsvTable read_csv_file(const std::string& path) { return parse_csv(read_file(path)); }

}  // namespace denslice
