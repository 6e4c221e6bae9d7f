#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cll/data.hpp"

namespace cll {

/// IDX element types handled here.
enum class IdxType : std::uint8_t { u8 = 0x08, f32 = 0x0D };

/// An IDX tensor: magic 00 00 <dtype> <rank>, rank big-endian u32 sizes,
/// then the row-major payload. Payload bytes are kept as stored
/// (big-endian for f32).
struct IdxTensor {
  IdxType dtype = IdxType::u8;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;

  std::size_t element_size() const noexcept { return dtype == IdxType::u8 ? 1 : 4; }
  std::size_t element_count() const noexcept;
  /// Element i as a double (u8 unscaled, f32 decoded from big-endian).
  double value(std::size_t i) const;

  friend bool operator==(const IdxTensor&, const IdxTensor&) = default;
};

/// Single-pass parse. Throws ParseError (bad magic, unsupported dtype,
/// truncated header, bad dims, truncated payload, trailing bytes) with
/// the byte offset where parsing stopped. Never reads out of bounds.
IdxTensor parse_idx(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor);

IdxTensor read_idx_file(const std::filesystem::path& path);
void write_idx_file(const std::filesystem::path& path, const IdxTensor& tensor);

/// Images (rank >= 2, first dim = count) plus labels (rank 1, u8). u8
/// pixels are divided by 255. Throws ValidationError on count mismatch.
LabeledDataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);
LabeledDataset idx_to_dataset(const IdxTensor& images, const IdxTensor& labels);

}  // namespace cll
