#include "cll/csv.hpp"

#include <charconv>
#include <cmath>

namespace cll {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
  bool first = true;
  for (auto name : names) {
    if (!first) out_ << ',';
    out_ << name;
    first = false;
  }
  out_ << '\n';
}

void CsvWriter::header(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

}  // namespace cll
