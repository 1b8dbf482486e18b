#include "repgeo/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "repgeo/image_io.hpp"

namespace repgeo {

namespace {

constexpr char kMagic[8] = {'R', 'G', 'T', 'E', 'N', 'S', 'O', 'R'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFloat64 = 1;

static_assert(std::endian::native == std::endian::little,
              "tensor container I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("tensor container truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::string encode_tensor(const Tensor& tensor) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, kFloat64);
  put<std::uint64_t>(out, tensor.rank());
  for (auto e : tensor.shape()) put<std::uint64_t>(out, e);
  out.append(reinterpret_cast<const char*>(tensor.data()), tensor.size() * sizeof(double));
  return out;
}

Tensor decode_tensor(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a tensor container (bad magic)");
  }
  std::size_t pos = sizeof(kMagic);
  if (take<std::uint32_t>(bytes, pos) != kVersion) throw IoError("unsupported container version");
  if (take<std::uint32_t>(bytes, pos) != kFloat64) throw IoError("unsupported dtype");
  const auto rank = take<std::uint64_t>(bytes, pos);
  if (rank > 16) throw IoError("implausible tensor rank " + std::to_string(rank));
  Shape shape;
  for (std::uint64_t i = 0; i < rank; ++i) shape.push_back(take<std::uint64_t>(bytes, pos));
  const std::size_t n = shape_numel(shape);
  if (bytes.size() - pos != n * sizeof(double)) {
    throw IoError("tensor container payload size does not match its shape");
  }
  std::vector<double> data(n);
  std::memcpy(data.data(), bytes.data() + pos, n * sizeof(double));
  return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const std::filesystem::path& file, const Tensor& tensor) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw IoError("cannot open " + file.string() + " for writing");
  const std::string bytes = encode_tensor(tensor);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + file.string());
}

Tensor read_tensor(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IoError("cannot open " + file.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const IoError& e) {
    throw IoError(file.string() + ": " + e.what());
  }
}

}  // namespace repgeo
