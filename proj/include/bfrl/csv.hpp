#pragma once

#include <string>
#include <vector>

namespace bfrl {

// Shortest round-trip decimal form, identical across reruns.
std::string format_double(double value);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_field(const std::string& value);
  void add_field(double value);
  void add_field(long long value);
  void add_field(std::uint64_t value);
  void add_field(bool value);  // 1/0
  void end_row();              // throws if the field count is off

  const std::string& str() const { return buffer_; }
  void write_file(const std::string& path) const;

 private:
  std::size_t columns_;
  std::size_t fields_in_row_ = 0;
  std::string buffer_;
};

}  // namespace bfrl
