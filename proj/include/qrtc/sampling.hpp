#pragma once

#include <cstddef>
#include <cstdint>

#include "qrtc/tensor.hpp"

namespace qrtc {

enum class MaskMode {
  element,  // each entry sampled independently
  pixel,    // a sampled position keeps every band along band_mode
};

/// Exactly round(sr * count) observed positions chosen by a seeded partial
/// Fisher-Yates shuffle over flat indices. In pixel mode "count" is the
/// number of positions in the tensor with `band_mode` collapsed.
/// Deterministic per (dims, sr, seed, mode, band_mode) across platforms.
Mask generate_mask(const Dims& dims, double sr, std::uint64_t seed, MaskMode mode = MaskMode::element,
                   std::size_t band_mode = 0);

}  // namespace qrtc
