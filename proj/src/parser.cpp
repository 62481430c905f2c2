#include "hiot/parser.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>

#include "hiot/error.hpp"
#include "hiot/sim.hpp"

namespace hiot::parser {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Consumes a tab or a run of >= 2 spaces. Returns false if neither is present.
bool eat_separator(std::string_view& s) {
  if (!s.empty() && s.front() == '\t') {
    s.remove_prefix(1);
    return true;
  }
  std::size_t spaces = 0;
  while (spaces < s.size() && s[spaces] == ' ') ++spaces;
  if (spaces >= 2) {
    s.remove_prefix(spaces);
    return true;
  }
  return false;
}

template <typename T>
bool eat_number(std::string_view& s, std::size_t min_digits, std::size_t max_digits, T& out) {
  std::size_t n = 0;
  while (n < s.size() && is_digit(s[n])) ++n;
  if (n < min_digits || n > max_digits) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + n, out);
  if (ec != std::errc{}) return false;
  s.remove_prefix(n);
  return true;
}

}  // namespace

LogRecord parse_line(std::string_view line, std::size_t line_number) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  auto fail = [&](const char* reason) { return ParseError(line_number, std::string(line), reason); };

  std::string_view s = line;
  long long minutes = 0;
  long long secs = 0;
  long long millis = 0;
  if (!eat_number(s, 2, 12, minutes) || s.empty() || s.front() != ':') throw fail("malformed time field");
  s.remove_prefix(1);
  if (!eat_number(s, 2, 2, secs) || secs >= 60 || s.empty() || s.front() != '.') {
    throw fail("malformed time field");
  }
  s.remove_prefix(1);
  if (!eat_number(s, 3, 3, millis)) throw fail("malformed time field");
  if (!eat_separator(s)) throw fail("missing separator after time");
  if (s.substr(0, 3) != "ID:") throw fail("missing ID: token");
  s.remove_prefix(3);
  unsigned long long mote = 0;
  if (!eat_number(s, 1, 10, mote) || mote == 0 || mote > std::numeric_limits<MoteId>::max()) {
    throw fail("bad mote id");
  }
  if (!eat_separator(s)) throw fail("missing separator after mote id");
  if (s.empty()) throw fail("empty message");

  return {Millis{minutes * 60000 + secs * 1000 + millis}, static_cast<MoteId>(mote), std::string(s)};
}

std::string format_record(const LogRecord& record) {
  return sim::format_timestamp(record.time) + "\tID:" + std::to_string(record.mote) + "\t" +
         record.message;
}

ParseResult parse_trace(std::istream& in, ParseOptions options) {
  ParseResult result;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    try {
      result.records.push_back(parse_line(line, line_number));
    } catch (const ParseError&) {
      if (!options.lenient) throw;
      ++result.skipped;
    }
  }
  return result;
}

ParseResult parse_trace_file(const std::filesystem::path& path, ParseOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_trace(in, options);
}

std::vector<LogRecord> filter_send_events(std::span<const LogRecord> records) {
  std::vector<LogRecord> out;
  for (const auto& r : records) {
    if (r.message.starts_with("DATA send")) out.push_back(r);
  }
  return out;
}

}  // namespace hiot::parser
