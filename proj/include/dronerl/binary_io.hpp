#pragma once

// Explicit little-endian encoding of scalars, strings and Eigen matrices.

#include <Eigen/Core>

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace dronerl::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename UInt>
void put_le(std::ostream& out, UInt v) {
  static_assert(std::is_unsigned_v<UInt>);
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  }
  out.write(bytes, sizeof(UInt));
}

template <typename UInt>
UInt get_le(std::istream& in) {
  static_assert(std::is_unsigned_v<UInt>);
  unsigned char bytes[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(UInt))) {
    throw FormatError("unexpected end of data");
  }
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

inline void put_u8(std::ostream& out, std::uint8_t v) { put_le(out, v); }
inline void put_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
inline void put_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
inline void put_i32(std::ostream& out, std::int32_t v) { put_le(out, static_cast<std::uint32_t>(v)); }
inline void put_i64(std::ostream& out, std::int64_t v) { put_le(out, static_cast<std::uint64_t>(v)); }
inline void put_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint8_t get_u8(std::istream& in) { return get_le<std::uint8_t>(in); }
inline std::uint32_t get_u32(std::istream& in) { return get_le<std::uint32_t>(in); }
inline std::uint64_t get_u64(std::istream& in) { return get_le<std::uint64_t>(in); }
inline std::int32_t get_i32(std::istream& in) { return static_cast<std::int32_t>(get_le<std::uint32_t>(in)); }
inline std::int64_t get_i64(std::istream& in) { return static_cast<std::int64_t>(get_le<std::uint64_t>(in)); }
inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_le<std::uint32_t>(in)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

inline void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in, std::size_t max_len = 1u << 24) {
  const std::uint32_t n = get_u32(in);
  if (n > max_len) throw FormatError("string length out of range");
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw FormatError("unexpected end of data");
  return s;
}

template <typename Scalar>
void put_matrix(std::ostream& out, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if constexpr (std::is_same_v<Scalar, float>) {
      put_f32(out, m.data()[i]);
    } else {
      put_f64(out, static_cast<double>(m.data()[i]));
    }
  }
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> get_matrix(std::istream& in) {
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  if (static_cast<std::uint64_t>(rows) * cols > (1ull << 28)) throw FormatError("matrix too large");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if constexpr (std::is_same_v<Scalar, float>) {
      m.data()[i] = get_f32(in);
    } else {
      m.data()[i] = static_cast<Scalar>(get_f64(in));
    }
  }
  return m;
}

}  // namespace dronerl::io
