#include "flowreach/gridio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace flowreach {

namespace {

constexpr char kMagic[8] = {'F', 'F', 'G', 'R', 'I', 'D', '0', '1'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    T out;
    auto* src = reinterpret_cast<const unsigned char*>(&v);
    auto* dst = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
  }
}

template <typename T>
void put(std::ofstream& out, T v) {
  if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    bits = to_little(bits);
    out.write(reinterpret_cast<const char*>(&bits), 8);
  } else {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
}

template <typename T>
bool get(std::ifstream& in, T& v) {
  if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>) {
    std::uint64_t bits;
    if (!in.read(reinterpret_cast<char*>(&bits), 8)) return false;
    bits = to_little(bits);
    std::memcpy(&v, &bits, 8);
    return true;
  } else {
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) return false;
    v = to_little(v);
    return true;
  }
}

}  // namespace

void write_grid(const ScalarGridField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_grid: cannot open " + path);
  const Grid& g = field.grid();
  out.write(kMagic, 8);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put<std::uint64_t>(out, static_cast<std::uint64_t>(g.nodes(a)));
  for (int a = 0; a < g.dim(); ++a) put<double>(out, g.min()[a]);
  put<double>(out, g.spacing());
  for (std::int64_t i = 0; i < field.size(); ++i) put<double>(out, field[i]);
  out.flush();
  if (!out) throw std::runtime_error("write_grid: write failed for " + path);
}

ScalarGridField read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_grid: cannot open " + path);

  char magic[8];
  if (!in.read(magic, 8)) throw GridIoError("read_grid: truncated header", 0);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    if (std::memcmp(magic, kMagic, 6) == 0)
      throw GridIoError("read_grid: unsupported format version", 0);
    throw GridIoError("read_grid: bad magic", 0);
  }

  std::uint32_t dim = 0;
  if (!get(in, dim)) throw GridIoError("read_grid: truncated dimension", 8);
  if (dim < 2 || dim > 8)
    throw GridIoError("read_grid: dimension " + std::to_string(dim) + " outside [2, 8]", 8);
  const int d = static_cast<int>(dim);

  std::int64_t offset = 12;
  std::vector<std::int64_t> cells(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a, offset += 8) {
    std::uint64_t nodes = 0;
    if (!get(in, nodes)) throw GridIoError("read_grid: truncated node counts", offset);
    if (nodes < 2) throw GridIoError("read_grid: fewer than 2 nodes on an axis", offset);
    cells[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(nodes) - 1;
  }
  VecN mn(d);
  for (int a = 0; a < d; ++a, offset += 8) {
    if (!get(in, mn[a])) throw GridIoError("read_grid: truncated axis minima", offset);
  }
  double h = 0.0;
  if (!get(in, h)) throw GridIoError("read_grid: truncated spacing", offset);
  offset += 8;
  if (!(h > 0.0)) throw GridIoError("read_grid: non-positive spacing", offset - 8);

  VecN mx(d);
  for (int a = 0; a < d; ++a)
    mx[a] = mn[a] + h * static_cast<double>(cells[static_cast<std::size_t>(a)]);
  Grid grid(mn, mx, cells);

  ScalarGridField field(grid, 0.0);
  for (std::int64_t i = 0; i < field.size(); ++i, offset += 8) {
    if (!get(in, field[i])) throw GridIoError("read_grid: truncated payload", offset);
  }
  return field;
}

}  // namespace flowreach
