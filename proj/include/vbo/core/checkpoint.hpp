#pragma once

// Parameter checkpoint format (version 1):
//   magic   "VBCK"            4 bytes
//   version u32 LE            currently 1
//   endian  u32 LE            0x01020304 written on the producing host
//   count   u32 LE            number of named arrays
//   per array:
//     name_len u32 LE, name bytes (no NUL)
//     ndim u32 LE, dims u32 LE each
//     data f64 LE, product(dims) entries
// All integers and floats are little-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbo {

struct NamedArray {
  std::vector<int> shape;
  std::vector<double> data;
};

using NamedArrays = std::map<std::string, NamedArray>;

namespace detail {
static_assert(std::endian::native == std::endian::little,
              "checkpoint i/o assumes a little-endian host");

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}
}  // namespace detail

inline void save_checkpoint(const std::string& path, const NamedArrays& arrays) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  os.write("VBCK", 4);
  detail::write_u32(os, 1);
  detail::write_u32(os, 0x01020304u);
  detail::write_u32(os, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& [name, arr] : arrays) {
    detail::write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_u32(os, static_cast<std::uint32_t>(arr.shape.size()));
    for (int d : arr.shape) detail::write_u32(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(arr.data.data()),
             static_cast<std::streamsize>(arr.data.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

inline NamedArrays load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VBCK", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const std::uint32_t version = detail::read_u32(is);
  if (version != 1) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  if (detail::read_u32(is) != 0x01020304u)
    throw std::runtime_error("checkpoint: endianness marker mismatch in " + path);
  const std::uint32_t count = detail::read_u32(is);
  NamedArrays out;
  for (std::uint32_t a = 0; a < count; ++a) {
    const std::uint32_t nlen = detail::read_u32(is);
    std::string name(nlen, '\0');
    is.read(name.data(), nlen);
    NamedArray arr;
    const std::uint32_t ndim = detail::read_u32(is);
    size_t n = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
      arr.shape.push_back(static_cast<int>(detail::read_u32(is)));
      n *= static_cast<size_t>(arr.shape.back());
    }
    arr.data.resize(n);
    is.read(reinterpret_cast<char*>(arr.data.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated array '" + name + "' in " + path);
    out.emplace(std::move(name), std::move(arr));
  }
  return out;
}

}  // namespace vbo
