#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cll {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Minimal CSV emitter. Fields are written verbatim; callers only pass
/// numbers and identifiers, which never need quoting.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> names);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

}  // namespace cll
