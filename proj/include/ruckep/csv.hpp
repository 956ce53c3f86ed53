#pragma once

// Minimal RFC 4180 style reader: comma separated, double-quote escaping,
// CRLF tolerant. Lines starting with '#' are comments.

#include <algorithm>
#include <cctype>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ruckep/error.hpp"

namespace ruckep::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line of the record start
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::string> comments;
  std::vector<Row> rows;

  /// Case-insensitive column lookup.
  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      const auto& h = header[i];
      if (h.size() == name.size() &&
          std::equal(h.begin(), h.end(), name.begin(), [](char a, char b) {
            return std::tolower(static_cast<unsigned char>(a)) ==
                   std::tolower(static_cast<unsigned char>(b));
          }))
        return i;
    }
    return std::nullopt;
  }

  std::size_t require(std::string_view name) const {
    if (auto idx = find(name)) return *idx;
    throw SchemaError(std::string(name), "missing required column '" + std::string(name) + "'");
  }
};

namespace detail {

// Reads one logical record; quoted fields may span lines.
inline bool read_record(std::istream& in, std::size_t& line_no, std::vector<std::string>& out,
                        std::string* raw_first_line = nullptr) {
  out.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (raw_first_line) *raw_first_line = line;

  std::string field;
  bool in_quotes = false;
  std::size_t i = 0;
  for (;;) {
    if (i >= line.size()) {
      if (in_quotes) {
        std::string next;
        if (!std::getline(in, next)) throw RowError(line_no, "unterminated quoted field");
        ++line_no;
        if (!next.empty() && next.back() == '\r') next.pop_back();
        field.push_back('\n');
        line = std::move(next);
        i = 0;
        continue;
      }
      out.push_back(std::move(field));
      return true;
    }
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      in_quotes = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
    ++i;
  }
}

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace detail

/// Parses a full table. An input with no header at all is a schema error.
inline Table read(std::istream& in) {
  Table t;
  std::size_t line_no = 0;
  std::vector<std::string> rec;
  std::string raw;
  for (;;) {
    if (!detail::read_record(in, line_no, rec, &raw))
      throw SchemaError("", "input has no header row");
    if (raw.empty() || raw[0] == '#') {
      if (!raw.empty()) t.comments.push_back(raw);
      continue;
    }
    break;
  }
  for (auto& h : rec) t.header.push_back(detail::trim(h));
  if (!t.header.empty() && t.header[0].rfind("\xEF\xBB\xBF", 0) == 0) t.header[0].erase(0, 3);

  for (;;) {
    const std::size_t start = line_no + 1;
    if (!detail::read_record(in, line_no, rec, &raw)) break;
    if (raw.empty() && rec.size() == 1 && rec[0].empty()) continue;
    if (!raw.empty() && raw[0] == '#') {
      t.comments.push_back(raw);
      continue;
    }
    if (rec.size() != t.header.size())
      throw RowError(start, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                std::to_string(rec.size()));
    t.rows.push_back(Row{start, rec});
  }
  return t;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace ruckep::csv
