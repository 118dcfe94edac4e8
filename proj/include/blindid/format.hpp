#ifndef BLINDID_FORMAT_HPP
#define BLINDID_FORMAT_HPP

#include <charconv>
#include <string>

namespace blindid {

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, result.ptr);
}

}  // namespace blindid

#endif  // BLINDID_FORMAT_HPP
