#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bmc::csv {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits; strtod on the result recovers the value exactly.
std::string format_double(double v);

double parse_double(std::string_view field);
std::int64_t parse_int(std::string_view field);
std::uint64_t parse_uint(std::string_view field);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Line reader for comma-separated files with a mandatory header row. When
/// `expected_header` is non-empty the header must match it exactly.
class Reader {
 public:
  Reader(std::istream& in, std::initializer_list<std::string_view> expected_header = {});

  const std::vector<std::string>& header() const noexcept { return header_; }
  /// Reads the next non-empty row; false at end of input. Rows must have as
  /// many fields as the header.
  bool next(std::vector<std::string>& row);
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

}  // namespace bmc::csv
