// Copyright 2026 The diffrac-bcfw Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIFFRAC_SRC_BINARY_IO_H_
#define DIFFRAC_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "diffrac/linalg.h"

namespace diffrac::binary {

// Little-endian u64 / f64 primitives shared by the matrix and checkpoint
// formats.

inline std::uint64_t ToLittle(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
    return r;
  }
  return v;
}

inline void WriteU64(std::ostream& out, std::uint64_t v) {
  const std::uint64_t le = ToLittle(v);
  out.write(reinterpret_cast<const char*>(&le), sizeof le);
}

inline void WriteF64(std::ostream& out, double v) {
  WriteU64(out, std::bit_cast<std::uint64_t>(v));
}

inline void WriteMagic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void Ensure(std::istream& in, const char* what) {
  if (!in) throw std::runtime_error(std::string("truncated input while reading ") + what);
}

inline std::uint64_t ReadU64(std::istream& in, const char* what) {
  std::uint64_t le = 0;
  in.read(reinterpret_cast<char*>(&le), sizeof le);
  Ensure(in, what);
  return ToLittle(le);
}

inline double ReadF64(std::istream& in, const char* what) {
  return std::bit_cast<double>(ReadU64(in, what));
}

inline void ExpectMagic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!in || got != magic) {
    throw std::runtime_error("bad magic: expected " + std::string(magic));
  }
}

// Row-major payload.
inline void WriteRows(std::ostream& out, MatrixCRef m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) WriteF64(out, m(r, c));
  }
}

inline Matrix ReadRows(std::istream& in, Index rows, Index cols, const char* what) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = ReadF64(in, what);
  }
  return m;
}

// Guards against absurd sizes in corrupt headers before allocating.
inline Index CheckedDim(std::uint64_t v, const char* what) {
  if (v > (std::uint64_t{1} << 40)) {
    throw std::runtime_error(std::string("implausible dimension in ") + what);
  }
  return static_cast<Index>(v);
}

}  // namespace diffrac::binary

#endif  // DIFFRAC_SRC_BINARY_IO_H_
