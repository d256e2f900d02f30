#ifndef FLOWREACH_GRIDIO_HPP
#define FLOWREACH_GRIDIO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "flowreach/grid.hpp"

namespace flowreach {

/// Malformed grid file; remembers where in the file the problem sits.
class GridIoError : public std::runtime_error {
 public:
  GridIoError(const std::string& what, std::int64_t byte_offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::int64_t byte_offset() const { return offset_; }

 private:
  std::int64_t offset_;
};

/// Binary grid format, fixed little-endian:
///   magic "FFGRID01" | u32 dimension d | d x u64 node counts |
///   d x f64 axis minima | f64 spacing | node values as f64, row-major with
///   the last axis varying fastest; +inf stored as IEEE positive infinity.
/// File size is exactly 8 + 4 + 8d + 8d + 8 + 8 * (number of nodes) bytes.
/// Round-trips are bit-identical.
void write_grid(const ScalarGridField& field, const std::string& path);
ScalarGridField read_grid(const std::string& path);

}  // namespace flowreach

#endif  // FLOWREACH_GRIDIO_HPP
