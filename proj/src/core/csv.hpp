#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace factorlens {

/// One parsed CSV record with its 1-based physical line number.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
/// Blank lines are skipped. Throws ValidationError naming `source` and line.
std::vector<CsvRow> parse_csv(std::string_view text, const std::string& source);

/// Reads a file and parses it; the header is the first returned row.
std::vector<CsvRow> read_csv_file(const std::string& path);

/// Throws unless the header matches `expected` exactly.
void require_header(const std::vector<CsvRow>& rows, const std::vector<std::string>& expected,
                    const std::string& source);

std::string csv_escape(std::string_view field);

/// Fixed 6-significant-digit rendering used by every artifact.
std::string format_number(double v);

/// Rounds to the 6-significant-digit decimal that format_number prints.
double round_sig6(double v);

std::string read_text_file(const std::string& path);

}  // namespace factorlens
