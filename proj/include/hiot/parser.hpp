#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiot/types.hpp"

namespace hiot::parser {

/// One parsed log line: the Time / Mote / Message baseline profile.
struct LogRecord {
  Millis time{0};
  MoteId mote = 0;
  std::string message;

  double seconds() const { return to_seconds(time); }

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// Parses `MM:SS.mmm<sep>ID:<n><sep><message>` where <sep> is a tab or a run
/// of two or more spaces. Minutes take at least two digits and have no upper
/// bound. Throws ParseError.
LogRecord parse_line(std::string_view line, std::size_t line_number = 1);

/// Inverse of parse_line for the canonical tab-separated form.
std::string format_record(const LogRecord& record);

struct ParseOptions {
  /// Skip and count malformed lines instead of failing on the first one.
  bool lenient = false;
};

struct ParseResult {
  std::vector<LogRecord> records;
  std::size_t skipped = 0;
};

ParseResult parse_trace(std::istream& in, ParseOptions options = {});
ParseResult parse_trace_file(const std::filesystem::path& path, ParseOptions options = {});

/// Records whose message starts with `DATA send`, in original order.
std::vector<LogRecord> filter_send_events(std::span<const LogRecord> records);

}  // namespace hiot::parser
