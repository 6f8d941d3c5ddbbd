#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oam {

struct CsvTable {
  std::vector<std::string> comments;  // written as "# <line>" before the header
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Shortest text that parses back to the same double; "nan", "inf", "-inf".
std::string format_number(double x);

// Quotes fields containing a comma, quote, CR or LF, doubling inner quotes.
std::string csv_escape(const std::string& field);

void write_csv(std::ostream& out, const CsvTable& table);

// Leading "#" lines become comments, the next record is the header. Throws
// std::runtime_error on malformed quoting or ragged rows.
CsvTable parse_csv(const std::string& text);

}  // namespace oam
