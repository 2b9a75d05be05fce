#include "qrtc/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "qrtc/errors.hpp"
#include "qrtc/metrics.hpp"

namespace qrtc {

namespace {

constexpr std::array<char, 5> kMagic{'D', 'T', 'E', 'N', '1'};
constexpr std::size_t kFixedHeader = 11;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(p[i]) << (8 * i);
  return value;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::uint8_t> encode_header(ElementType type, const Dims& dims) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(kDtenVersion);
  out.push_back(static_cast<std::uint8_t>(type));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) put_le<std::uint64_t>(out, d);
  return out;
}

struct Decoded {
  ElementType type;
  Dims dims;
  std::size_t payload_offset;
};

Decoded decode_header(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  const std::string name = path.string();
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw FormatError(FormatErrorKind::bad_magic, name + ": not a DTEN1 file");
  if (bytes.size() < kFixedHeader) throw FormatError(FormatErrorKind::truncated, name + ": truncated header");
  if (bytes[5] != kDtenVersion)
    throw FormatError(FormatErrorKind::unsupported_version, name + ": unsupported version " + std::to_string(bytes[5]));
  if (bytes[6] > static_cast<std::uint8_t>(ElementType::mask8))
    throw FormatError(FormatErrorKind::malformed, name + ": unknown element type");
  Decoded d{static_cast<ElementType>(bytes[6]), {}, 0};
  const auto ndim = get_le<std::uint32_t>(bytes.data() + 7);
  if (ndim == 0) throw FormatError(FormatErrorKind::malformed, name + ": zero-order tensor");
  d.payload_offset = kFixedHeader + 8 * static_cast<std::size_t>(ndim);
  if (bytes.size() < d.payload_offset) throw FormatError(FormatErrorKind::truncated, name + ": truncated extents");
  for (std::uint32_t k = 0; k < ndim; ++k) {
    const auto extent = get_le<std::uint64_t>(bytes.data() + kFixedHeader + 8 * k);
    if (extent == 0) throw FormatError(FormatErrorKind::malformed, name + ": zero extent");
    d.dims.push_back(static_cast<std::size_t>(extent));
  }
  const std::size_t width = d.type == ElementType::float64 ? 8 : 1;
  const std::size_t expected = d.payload_offset + element_count(d.dims) * width;
  if (bytes.size() < expected) throw FormatError(FormatErrorKind::truncated, name + ": truncated payload");
  if (bytes.size() > expected) throw FormatError(FormatErrorKind::malformed, name + ": trailing bytes after payload");
  return d;
}

}  // namespace

void save_tensor(const DenseTensor& t, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = encode_header(ElementType::float64, t.dims());
  bytes.reserve(bytes.size() + 8 * t.size());
  for (double v : t.data()) put_le<std::uint64_t>(bytes, std::bit_cast<std::uint64_t>(v));
  write_file(path, bytes);
}

DenseTensor load_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const Decoded d = decode_header(bytes, path);
  if (d.type != ElementType::float64)
    throw FormatError(FormatErrorKind::type_mismatch, path.string() + ": expected a float64 tensor");
  std::vector<double> data(element_count(d.dims));
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes.data() + d.payload_offset + 8 * i));
  return DenseTensor(d.dims, std::move(data));
}

void save_mask(const Mask& m, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = encode_header(ElementType::mask8, m.dims());
  bytes.insert(bytes.end(), m.bits().begin(), m.bits().end());
  write_file(path, bytes);
}

Mask load_mask(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const Decoded d = decode_header(bytes, path);
  if (d.type != ElementType::mask8)
    throw FormatError(FormatErrorKind::type_mismatch, path.string() + ": expected a mask");
  std::vector<std::uint8_t> bits(bytes.begin() + static_cast<std::ptrdiff_t>(d.payload_offset), bytes.end());
  if (std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b > 1; }))
    throw FormatError(FormatErrorKind::malformed, path.string() + ": mask entries must be 0 or 1");
  return Mask(d.dims, std::move(bits));
}

ElementType peek_element_type(const std::filesystem::path& path) {
  return decode_header(read_file(path), path).type;
}

void export_slice_pgm(const DenseTensor& t, std::size_t band_mode, std::size_t band_index,
                      const std::filesystem::path& path) {
  const Matrix slice = band_slice(t, band_mode, band_index);
  const std::string header =
      "P5\n" + std::to_string(slice.cols()) + " " + std::to_string(slice.rows()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  for (Eigen::Index i = 0; i < slice.rows(); ++i)
    for (Eigen::Index j = 0; j < slice.cols(); ++j) {
      const double v = slice(i, j);
      const double clamped = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
      bytes.push_back(static_cast<std::uint8_t>(std::floor(255.0 * clamped + 0.5)));
    }
  write_file(path, bytes);
}

Matrix read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::string name = path.string();
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) token.push_back(static_cast<char>(bytes[pos++]));
    if (token.empty()) throw FormatError(FormatErrorKind::truncated, name + ": truncated PGM header");
    return token;
  };
  auto number = [&]() -> std::size_t {
    const std::string token = next_token();
    if (!std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw FormatError(FormatErrorKind::malformed, name + ": bad PGM header field");
    return std::stoul(token);
  };

  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2") throw FormatError(FormatErrorKind::bad_magic, name + ": not a PGM file");
  const std::size_t width = number();
  const std::size_t height = number();
  const std::size_t maxval = number();
  if (width == 0 || height == 0 || maxval == 0 || maxval > 65535)
    throw FormatError(FormatErrorKind::malformed, name + ": bad PGM dimensions");

  Matrix image(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (std::size_t i = 0; i < height; ++i)
      for (std::size_t j = 0; j < width; ++j)
        image(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(number()) * scale;
    return image;
  }
  ++pos;  // single whitespace after maxval
  const std::size_t sample = maxval < 256 ? 1 : 2;
  if (bytes.size() < pos + width * height * sample) throw FormatError(FormatErrorKind::truncated, name + ": truncated PGM");
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      const std::uint8_t* p = bytes.data() + pos + (i * width + j) * sample;
      const unsigned value = sample == 1 ? p[0] : (static_cast<unsigned>(p[0]) << 8) | p[1];  // big-endian per netpbm
      image(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value * scale;
    }
  return image;
}

namespace {

Matrix read_raw_band(const std::filesystem::path& path, const BandStackOptions& options) {
  if (options.width == 0 || options.height == 0) throw ArgumentError("raw band files need --width and --height");
  const auto bytes = read_file(path);
  const std::size_t sample = options.raw_type == RawType::float32 ? 4 : 8;
  const std::size_t expected = options.width * options.height * sample;
  if (bytes.size() < expected) throw FormatError(FormatErrorKind::truncated, path.string() + ": truncated raw band");
  if (bytes.size() > expected) throw FormatError(FormatErrorKind::malformed, path.string() + ": raw band larger than width*height");
  Matrix band(static_cast<Eigen::Index>(options.height), static_cast<Eigen::Index>(options.width));
  for (std::size_t i = 0; i < options.height; ++i)
    for (std::size_t j = 0; j < options.width; ++j) {
      const std::uint8_t* p = bytes.data() + (i * options.width + j) * sample;
      const double v = sample == 4 ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)))
                                   : std::bit_cast<double>(get_le<std::uint64_t>(p));
      band(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  return band;
}

}  // namespace

DenseTensor stack_bands(const std::vector<std::filesystem::path>& files, const BandStackOptions& options) {
  if (files.empty()) throw ArgumentError("no band files given");
  std::vector<Matrix> bands;
  bands.reserve(files.size());
  for (const auto& file : files) {
    bands.push_back(file.extension() == ".pgm" ? read_pgm(file) : read_raw_band(file, options));
    if (bands.back().rows() != bands.front().rows() || bands.back().cols() != bands.front().cols())
      throw ArgumentError(file.string() + ": band size differs from the first band");
  }
  const auto height = static_cast<std::size_t>(bands.front().rows());
  const auto width = static_cast<std::size_t>(bands.front().cols());
  DenseTensor t({height, width, bands.size()});
  for (std::size_t b = 0; b < bands.size(); ++b)
    for (std::size_t j = 0; j < width; ++j)
      for (std::size_t i = 0; i < height; ++i)
        t[i + height * (j + width * b)] = bands[b](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return t;
}

}  // namespace qrtc
