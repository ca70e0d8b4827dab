#include "bfrl/csv.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace bfrl {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw std::invalid_argument("csv: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

void CsvWriter::add_field(const std::string& value) {
  if (fields_in_row_) buffer_ += ',';
  buffer_ += value;
  ++fields_in_row_;
}

void CsvWriter::add_field(double value) { add_field(format_double(value)); }

void CsvWriter::add_field(long long value) { add_field(std::to_string(value)); }

void CsvWriter::add_field(std::uint64_t value) { add_field(std::to_string(value)); }

void CsvWriter::add_field(bool value) { add_field(std::string(value ? "1" : "0")); }

void CsvWriter::end_row() {
  if (fields_in_row_ != columns_) {
    throw std::logic_error("csv: row has " + std::to_string(fields_in_row_) +
                           " fields, expected " + std::to_string(columns_));
  }
  buffer_ += '\n';
  fields_in_row_ = 0;
}

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot open '" + path + "'");
  out << buffer_;
  if (!out) throw std::runtime_error("csv: write failed for '" + path + "'");
}

}  // namespace bfrl
