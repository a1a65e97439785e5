#pragma once

// Little-endian binary IO helpers. All on-disk formats in this project are
// explicitly little-endian regardless of host byte order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "esnet/errors.hpp"

namespace esnet::bin {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& os, double v) {
  put_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void put_magic(std::ostream& os, const char (&magic)[9]) {
  os.write(magic, 8);
}

inline void fail_eof(const std::string& what) {
  throw DataError("truncated or unreadable file: expected " + what);
}

inline std::uint32_t get_u32(std::istream& is, const char* what = "u32") {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) fail_eof(what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& is, const char* what = "u64") {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) fail_eof(what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is, const char* what = "f64") {
  return std::bit_cast<double>(get_u64(is, what));
}

inline void expect_magic(std::istream& is, const char (&magic)[9], const char* what) {
  char got[8];
  if (!is.read(got, 8)) fail_eof(what);
  if (std::memcmp(got, magic, 8) != 0)
    throw DataError(std::string("bad magic for ") + what + " (got \"" + std::string(got, 8) + "\")");
}

// Bulk f64 arrays: serialized element-wise little-endian. On LE hosts this is
// a straight memcpy-shaped loop; correctness does not depend on host order.
inline void put_f64_array(std::ostream& os, const double* v, std::size_t n) {
  std::vector<unsigned char> buf(n * 8);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(v[i]);
    for (int k = 0; k < 8; ++k) buf[i * 8 + k] = static_cast<unsigned char>(u >> (8 * k));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline void get_f64_array(std::istream& is, double* v, std::size_t n, const char* what = "f64 array") {
  std::vector<unsigned char> buf(n * 8);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    fail_eof(what);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t u = 0;
    for (int k = 0; k < 8; ++k) u |= std::uint64_t(buf[i * 8 + k]) << (8 * k);
    v[i] = std::bit_cast<double>(u);
  }
}

}  // namespace esnet::bin
