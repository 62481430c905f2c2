#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "hiot/error.hpp"

namespace hiot::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; add byte swapping for this target");

inline void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(ErrorKind::Data, "truncated binary file");
  }
  return v;
}

inline double read_f64(std::istream& in) {
  double v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(ErrorKind::Data, "truncated binary file");
  }
  return v;
}

}  // namespace hiot::detail
