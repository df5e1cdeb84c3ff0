#include "ucn/csvio.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ucn {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

void check_field(const std::string& f) {
  if (f.find_first_of(",\"\n\r") != std::string::npos)
    throw std::invalid_argument("csv field needs quoting, unsupported: '" + f +
                                "'");
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::runtime_error("missing column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      t.header = split_line(line);
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != t.header.size())
      throw std::runtime_error(path + " line " + std::to_string(lineno) +
                               ": expected " + std::to_string(t.header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  if (lineno == 0) throw std::runtime_error(path + ": empty file, no header");
  return t;
}

CsvWriter::CsvWriter(std::vector<std::string> header)
    : header_(std::move(header)) {
  for (const auto& h : header_) check_field(h);
}

void CsvWriter::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw std::invalid_argument("csv row width mismatch");
  for (const auto& f : row) check_field(f);
  rows_.push_back(std::move(row));
}

std::string CsvWriter::to_text() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i)
    out << (i ? "," : "") << header_[i];
  out << "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

void CsvWriter::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << to_text();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ucn
