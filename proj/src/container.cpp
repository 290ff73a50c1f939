#include "tcof/container.hpp"

#include "tcof/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace tcof {
namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', 'R'};
constexpr std::uint8_t kDtypeF32 = 0;

template <typename T>
void put_le(std::string& buf, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string take(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t offset() const { return pos_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("TNSR: " + msg + " at offset " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("TNSR: truncated while reading ") + what + " at offset " + std::to_string(pos_));
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void TensorContainer::add(std::string name, Tensor tensor) {
  if (contains(name)) throw FormatError("duplicate container entry '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(tensor));
}

const Tensor* TensorContainer::find(const std::string& name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == name; });
  return it == entries_.end() ? nullptr : &it->second;
}

const Tensor& TensorContainer::at(const std::string& name) const {
  if (const Tensor* t = find(name)) return *t;
  throw FormatError("container has no entry '" + name + "'");
}

std::string serialize_container(const TensorContainer& container) {
  std::string buf(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(buf, kTnsrVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(container.size()));
  for (const auto& [name, tensor] : container.entries()) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw FormatError("entry name too long: " + name);
    if (tensor.rank() > std::numeric_limits<std::uint8_t>::max()) throw FormatError("rank too large for " + name);
    put_le<std::uint16_t>(buf, static_cast<std::uint16_t>(name.size()));
    buf += name;
    buf.push_back(static_cast<char>(kDtypeF32));
    buf.push_back(static_cast<char>(tensor.rank()));
    for (auto d : tensor.dims()) {
      if (d == 0 || d > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError("entry '" + name + "' has invalid dims " + to_string(tensor.dims()));
      }
      put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(d));
    }
    for (float x : tensor.data()) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(x));
  }
  return buf;
}

TensorContainer parse_container(const std::string& bytes) {
  Reader r(bytes);
  if (r.take(4, "magic") != std::string(kMagic, sizeof(kMagic))) {
    throw FormatError("TNSR: bad magic at offset 0");
  }
  const auto version_at = r.offset();
  if (const auto version = r.get<std::uint32_t>("version"); version != kTnsrVersion) {
    throw FormatError("TNSR: unsupported version " + std::to_string(version) + " at offset " +
                      std::to_string(version_at));
  }
  const auto count = r.get<std::uint32_t>("entry count");

  TensorContainer container;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = r.get<std::uint16_t>("name length");
    std::string name = r.take(name_len, "name");
    if (const auto dtype = r.get<std::uint8_t>("dtype"); dtype != kDtypeF32) {
      r.fail("unsupported dtype " + std::to_string(dtype) + " for entry '" + name + "'");
    }
    const auto rank = r.get<std::uint8_t>("rank");
    Tensor::Dims dims(rank);
    for (auto& d : dims) {
      d = r.get<std::uint32_t>("dims");
      if (d == 0) r.fail("zero dimension in entry '" + name + "'");
    }
    std::vector<float> data(element_count(dims));
    for (auto& x : data) x = std::bit_cast<float>(r.get<std::uint32_t>("tensor data"));
    if (container.contains(name)) r.fail("duplicate entry '" + name + "'");
    container.add(std::move(name), Tensor(std::move(dims), std::move(data)));
  }
  if (r.offset() != bytes.size()) r.fail("trailing bytes after last entry");
  return container;
}

void write_container(std::ostream& out, const TensorContainer& container) {
  const std::string bytes = serialize_container(container);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed to write TNSR stream");
}

TensorContainer read_container(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_container(bytes);
}

void save_container(const std::filesystem::path& path, const TensorContainer& container) {
  // Writes a sibling ".tmp" file, then renames it over `path`.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    write_container(out, container);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

TensorContainer load_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_container(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace tcof
