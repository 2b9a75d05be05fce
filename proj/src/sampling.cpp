#include "qrtc/sampling.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "qrtc/errors.hpp"

namespace qrtc {

namespace {

// std::uniform_int_distribution is implementation-defined; this draw is not.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % bound;
}

std::vector<std::size_t> choose(std::size_t population, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(rng, population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

Mask generate_mask(const Dims& dims, double sr, std::uint64_t seed, MaskMode mode, std::size_t band_mode) {
  if (!(sr > 0.0 && sr <= 1.0)) throw ArgumentError("sampling rate must lie in (0, 1]");
  const std::size_t total = element_count(dims);
  Mask mask(dims, std::uint8_t{0});

  if (mode == MaskMode::element) {
    const auto count = static_cast<std::size_t>(std::llround(sr * static_cast<double>(total)));
    for (std::size_t i : choose(total, count, seed)) mask.set(i, true);
    return mask;
  }

  if (band_mode < 1 || band_mode > dims.size()) throw ArgumentError("band mode out of range");
  const std::size_t bands = dims[band_mode - 1];
  std::size_t left = 1;
  for (std::size_t k = 0; k + 1 < band_mode; ++k) left *= dims[k];
  const std::size_t positions = total / bands;
  const auto count = static_cast<std::size_t>(std::llround(sr * static_cast<double>(positions)));
  for (std::size_t p : choose(positions, count, seed)) {
    const std::size_t a = p % left;
    const std::size_t b = p / left;
    for (std::size_t band = 0; band < bands; ++band) mask.set(a + left * (band + bands * b), true);
  }
  return mask;
}

}  // namespace qrtc
