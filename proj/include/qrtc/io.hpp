#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "qrtc/tensor.hpp"

namespace qrtc {

// DTEN1 container, little-endian throughout:
//
//   offset  size     field
//   0       5        magic "DTEN1"
//   5       1        version (1)
//   6       1        element type (0 = float64, 1 = uint8 mask)
//   7       4        ndim (uint32)
//   11      8*ndim   extents (uint64 each)
//   ...              payload, first index fastest
//
// Loading validates magic, version, element type and payload length and
// throws FormatError with a distinct kind for each failure.

inline constexpr std::uint8_t kDtenVersion = 1;

enum class ElementType : std::uint8_t { float64 = 0, mask8 = 1 };

void save_tensor(const DenseTensor& t, const std::filesystem::path& path);
DenseTensor load_tensor(const std::filesystem::path& path);

void save_mask(const Mask& m, const std::filesystem::path& path);
Mask load_mask(const std::filesystem::path& path);

/// Reads the element type recorded in a DTEN1 header.
ElementType peek_element_type(const std::filesystem::path& path);

/// Writes band `band_index` (1-based) along `band_mode` as an 8-bit binary
/// PGM. Values are clamped to [0, 1] and mapped with floor(255 * v + 0.5);
/// rows of the slice become image rows.
void export_slice_pgm(const DenseTensor& t, std::size_t band_mode, std::size_t band_index,
                      const std::filesystem::path& path);

/// Reads a binary (P5) or ASCII (P2) PGM, scaled to [0, 1] by its maxval.
Matrix read_pgm(const std::filesystem::path& path);

enum class RawType { float32, float64 };

struct BandStackOptions {
  // Only used for raw (non-.pgm) band files: row-major height x width,
  // little-endian.
  std::size_t width = 0;
  std::size_t height = 0;
  RawType raw_type = RawType::float32;
};

/// Stacks 2-D band files into a height x width x bands tensor. Files ending
/// in .pgm are decoded as PGM, anything else as raw floats.
DenseTensor stack_bands(const std::vector<std::filesystem::path>& files, const BandStackOptions& options);

}  // namespace qrtc
