#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hiot {

// Values double as CLI exit codes and C API status codes.
enum class ErrorKind : int {
  Config = 2,
  Parse = 3,
  Data = 4,
  Numeric = 5,
  Io = 6,
  Eval = 7,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed log line. Carries the 1-based line number and the offending text.
class ParseError : public Error {
 public:
  ParseError(std::size_t line_number, std::string text, const std::string& reason);

  std::size_t line_number() const noexcept { return line_number_; }
  const std::string& text() const noexcept { return text_; }

 private:
  std::size_t line_number_;
  std::string text_;
};

}  // namespace hiot
