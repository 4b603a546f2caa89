#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace iterfac {

// Locale-independent scientific rendering with exactly 12 significant digits.
std::string format_numeric(double x);
std::string format_numeric(std::uint64_t x);
std::string format_numeric(int x);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);  // throws on IO failure

}  // namespace iterfac
