#include "hiot/error.hpp"

#include <utility>

namespace hiot {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Data: return "data";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Io: return "io";
    case ErrorKind::Eval: return "eval";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

ParseError::ParseError(std::size_t line_number, std::string text, const std::string& reason)
    : Error(ErrorKind::Parse,
            "line " + std::to_string(line_number) + ": " + reason + ": '" + text + "'"),
      line_number_(line_number),
      text_(std::move(text)) {}

}  // namespace hiot
