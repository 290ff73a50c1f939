#pragma once

#include "tcof/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tcof {

// Ordered collection of uniquely named tensors, serialized as TNSR:
//
//   "TNSR"  u32 version(=1)  u32 count
//   per entry: u16 name_len, name bytes, u8 dtype(0 = f32), u8 rank,
//              rank x u32 dims, row-major little-endian f32 data
//
// No alignment padding anywhere.
class TensorContainer {
 public:
  using Entry = std::pair<std::string, Tensor>;

  void add(std::string name, Tensor tensor);
  const Tensor* find(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  friend bool operator==(const TensorContainer&, const TensorContainer&) = default;

 private:
  std::vector<Entry> entries_;
};

inline constexpr std::uint32_t kTnsrVersion = 1;

void write_container(std::ostream& out, const TensorContainer& container);
TensorContainer read_container(std::istream& in);

std::string serialize_container(const TensorContainer& container);
TensorContainer parse_container(const std::string& bytes);

void save_container(const std::filesystem::path& path, const TensorContainer& container);
TensorContainer load_container(const std::filesystem::path& path);

}  // namespace tcof
