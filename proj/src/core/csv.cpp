#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace factorlens {

std::vector<CsvRow> parse_csv(std::string_view text, const std::string& source) {
  std::vector<CsvRow> rows;
  CsvRow current;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields.front().empty();
    if (!blank) {
      current.line = record_line;
      rows.push_back(std::move(current));
    }
    current = CsvRow{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || field_quoted) {
          throw ValidationError(source + ":" + std::to_string(line) + ": unexpected quote inside field");
        }
        in_quotes = true;
        field_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(ch);
    }
  }
  if (in_quotes) throw ValidationError(source + ":" + std::to_string(record_line) + ": unterminated quoted field");
  if (!field.empty() || field_quoted || !current.fields.empty()) end_record();
  return rows;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<CsvRow> read_csv_file(const std::string& path) { return parse_csv(read_text_file(path), path); }

void require_header(const std::vector<CsvRow>& rows, const std::vector<std::string>& expected,
                    const std::string& source) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  if (rows.empty()) throw ValidationError(source + ":1: empty file, expected header `" + join(expected) + "`");
  if (rows.front().fields != expected) {
    throw ValidationError(source + ":" + std::to_string(rows.front().line) + ": expected header `" + join(expected) +
                          "`, found `" + join(rows.front().fields) + "`");
  }
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double round_sig6(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

}  // namespace factorlens
