#include "oam/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace oam {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << "\r\n";
}

}  // namespace

void write_csv(std::ostream& out, const CsvTable& table) {
  for (const auto& c : table.comments) out << "# " << c << "\r\n";
  write_record(out, table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::logic_error("csv row width differs from header");
    write_record(out, row);
  }
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto line_end = [&](std::size_t from) {
    std::size_t e = text.find('\n', from);
    return e == std::string::npos ? n : e;
  };
  while (i < n && text[i] == '#') {
    std::size_t e = line_end(i);
    std::string line = text.substr(i + 1, e - i - 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == ' ') line.erase(0, 1);
    t.comments.push_back(line);
    i = e < n ? e + 1 : n;
  }

  std::vector<std::vector<std::string>> records;
  while (i < n) {
    std::vector<std::string> fields;
    std::string field;
    bool done = false;
    while (!done) {
      if (i < n && text[i] == '"') {
        ++i;
        for (;;) {
          if (i >= n) throw std::runtime_error("csv: unterminated quoted field");
          if (text[i] == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field += '"';
              i += 2;
            } else {
              ++i;
              break;
            }
          } else {
            field += text[i++];
          }
        }
      }
      while (i < n && text[i] != ',' && text[i] != '\r' && text[i] != '\n') {
        if (text[i] == '"') throw std::runtime_error("csv: stray quote");
        field += text[i++];
      }
      fields.push_back(std::move(field));
      field.clear();
      if (i < n && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < n && text[i] == '\r') ++i;
      if (i < n && text[i] == '\n') ++i;
      done = true;
    }
    records.push_back(std::move(fields));
  }
  if (records.empty()) throw std::runtime_error("csv: missing header");
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw std::runtime_error("csv: row " + std::to_string(r) + " has " +
                               std::to_string(records[r].size()) + " fields, header has " +
                               std::to_string(t.header.size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

}  // namespace oam
