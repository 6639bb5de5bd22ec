#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace bdy {

/// %.17g, enough digits to round-trip any double.
std::string format_number(double x);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace bdy
