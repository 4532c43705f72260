#include "bmc/csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>

namespace bmc::csv {

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class Int>
Int parse_integral(std::string_view field) {
  field = trim(field);
  Int value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("not an integer: '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

double parse_double(std::string_view field) {
  const std::string s(trim(field));
  if (s.empty()) throw ParseError("empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ParseError("not a number: '" + s + "'");
  return v;
}

std::int64_t parse_int(std::string_view field) { return parse_integral<std::int64_t>(field); }
std::uint64_t parse_uint(std::string_view field) { return parse_integral<std::uint64_t>(field); }

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Reader::Reader(std::istream& in, std::initializer_list<std::string_view> expected_header) : in_(in) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError("CSV input is empty");
  header_ = split(trim(line));
  if (expected_header.size() != 0) {
    std::vector<std::string> want(expected_header.begin(), expected_header.end());
    if (header_ != want) {
      std::string joined;
      for (const auto& h : want) joined += (joined.empty() ? "" : ",") + h;
      throw ParseError("unexpected CSV header, want '" + joined + "'");
    }
  }
}

bool Reader::next(std::vector<std::string>& row) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    row = split(trim(line));
    if (row.size() != header_.size()) {
      throw ParseError("CSV line " + std::to_string(line_) + " has " + std::to_string(row.size()) +
                       " fields, header has " + std::to_string(header_.size()));
    }
    return true;
  }
  return false;
}

}  // namespace bmc::csv
