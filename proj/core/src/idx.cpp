#include "cll/idx.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "cll/error.hpp"

namespace cll {
namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

std::size_t IdxTensor::element_count() const noexcept {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

double IdxTensor::value(std::size_t i) const {
  if (i >= element_count()) throw IndexError("IDX element index out of range");
  if (dtype == IdxType::u8) return payload[i];
  const std::uint32_t bits = read_be32(payload.data() + 4 * i);
  return static_cast<double>(std::bit_cast<float>(bits));
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  using Kind = ParseError::Kind;
  if (bytes.size() < 4) throw ParseError(Kind::truncated_header, bytes.size(), "IDX header needs 4 magic bytes");
  if (bytes[0] != 0) throw ParseError(Kind::bad_magic, 0, "IDX magic must start with 0x00 0x00");
  if (bytes[1] != 0) throw ParseError(Kind::bad_magic, 1, "IDX magic must start with 0x00 0x00");
  IdxTensor t;
  switch (bytes[2]) {
    case 0x08: t.dtype = IdxType::u8; break;
    case 0x0D: t.dtype = IdxType::f32; break;
    default:
      throw ParseError(Kind::unsupported_dtype, 2, "unsupported IDX element type " + std::to_string(bytes[2]));
  }
  const std::size_t rank = bytes[3];
  if (rank == 0) throw ParseError(Kind::bad_dims, 3, "IDX rank must be at least 1");
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header)
    throw ParseError(Kind::truncated_header, bytes.size(),
                     "IDX header declares " + std::to_string(rank) + " dimensions but the input ends early");
  t.dims.reserve(rank);
  std::size_t count = 1;
  const std::size_t limit = std::numeric_limits<std::size_t>::max() / t.element_size();
  for (std::size_t d = 0; d < rank; ++d) {
    const std::uint32_t n = read_be32(bytes.data() + 4 + 4 * d);
    t.dims.push_back(n);
    if (n != 0 && count > limit / n) throw ParseError(Kind::bad_dims, 4 + 4 * d, "IDX dimensions overflow");
    count *= n;
  }
  const std::size_t payload = count * t.element_size();
  const std::size_t available = bytes.size() - header;
  if (available < payload)
    throw ParseError(Kind::truncated_payload, bytes.size(),
                     "IDX payload truncated: expected " + std::to_string(payload) + " bytes, found " +
                         std::to_string(available));
  if (available > payload)
    throw ParseError(Kind::trailing_bytes, header + payload,
                     "IDX input has " + std::to_string(available - payload) + " trailing bytes");
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return t;
}

std::vector<std::uint8_t> encode_idx(const IdxTensor& t) {
  if (t.dims.empty() || t.dims.size() > 255) throw ValidationError("IDX rank must be in [1, 255]");
  if (t.payload.size() != t.element_count() * t.element_size()) throw ValidationError("IDX payload size mismatch");
  std::vector<std::uint8_t> out{0, 0, static_cast<std::uint8_t>(t.dtype), static_cast<std::uint8_t>(t.dims.size())};
  for (auto d : t.dims) write_be32(out, d);
  out.insert(out.end(), t.payload.begin(), t.payload.end());
  return out;
}

IdxTensor read_idx_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open IDX file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

void write_idx_file(const std::filesystem::path& path, const IdxTensor& tensor) {
  const auto bytes = encode_idx(tensor);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write IDX file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

LabeledDataset idx_to_dataset(const IdxTensor& images, const IdxTensor& labels) {
  if (images.dims.size() < 2) throw ValidationError("IDX images need rank >= 2 (count, then feature dims)");
  if (labels.dims.size() != 1 || labels.dtype != IdxType::u8)
    throw ValidationError("IDX labels must be a rank-1 unsigned-byte tensor");
  if (images.dims[0] != labels.dims[0])
    throw ValidationError("IDX images and labels disagree on the example count: " + std::to_string(images.dims[0]) +
                          " vs " + std::to_string(labels.dims[0]));
  const std::size_t n = images.dims[0];
  const std::size_t dims = n == 0 ? 0 : images.element_count() / n;
  LabeledDataset out;
  out.dims = static_cast<int>(dims);
  out.generator = "idx";
  out.features.reserve(n);
  out.labels.reserve(n);
  int max_label = 1;
  const double scale = images.dtype == IdxType::u8 ? 1.0 / 255.0 : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(dims);
    for (std::size_t j = 0; j < dims; ++j) x[j] = images.value(i * dims + j) * scale;
    out.features.push_back(std::move(x));
    const int y = labels.payload[i];
    max_label = std::max(max_label, y);
    out.labels.push_back(y);
  }
  out.num_classes = max_label + 1;
  return out;
}

LabeledDataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return idx_to_dataset(read_idx_file(images), read_idx_file(labels));
}

}  // namespace cll
