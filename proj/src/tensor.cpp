#include "qrtc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "qrtc/errors.hpp"

namespace qrtc {

namespace {

void check_dims(const Dims& dims) {
  if (dims.empty()) throw ArgumentError("tensor order must be at least 1");
  for (std::size_t extent : dims)
    if (extent == 0) throw ArgumentError("tensor extents must be positive");
}

void check_mode(std::size_t mode, std::size_t order) {
  if (mode < 1 || mode > order)
    throw ArgumentError("mode " + std::to_string(mode) + " out of range 1.." + std::to_string(order));
}

void check_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (a != b) throw ArgumentError(std::string(what) + ": dimension mismatch");
}

// Extents below and above a mode: a tensor is viewed as left x I_mode x right.
struct ModeSplit {
  std::size_t left = 1;
  std::size_t extent = 1;
  std::size_t right = 1;
};

ModeSplit split_at(const Dims& dims, std::size_t mode) {
  ModeSplit s;
  for (std::size_t k = 0; k + 1 < mode; ++k) s.left *= dims[k];
  s.extent = dims[mode - 1];
  for (std::size_t k = mode; k < dims.size(); ++k) s.right *= dims[k];
  return s;
}

}  // namespace

std::size_t element_count(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Dims dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(element_count(dims_), 0.0);
}

DenseTensor::DenseTensor(Dims dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (data_.size() != element_count(dims_)) throw ArgumentError("tensor data length does not match dims");
}

DenseTensor DenseTensor::filled(Dims dims, double value) {
  DenseTensor t(std::move(dims));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

std::size_t DenseTensor::extent(std::size_t mode) const {
  check_mode(mode, order());
  return dims_[mode - 1];
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw ArgumentError("index arity does not match tensor order");
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (index[k] < 1 || index[k] > dims_[k]) throw ArgumentError("tensor index out of range");
    flat += (index[k] - 1) * stride;
    stride *= dims_[k];
  }
  return flat;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  check_same_dims(dims_, other.dims_, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
  check_same_dims(dims_, other.dims_, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double scale, DenseTensor a) { return a *= scale; }

Mask::Mask(Dims dims, std::uint8_t fill) : dims_(std::move(dims)) {
  check_dims(dims_);
  if (fill > 1) throw ArgumentError("mask entries must be 0 or 1");
  bits_.assign(element_count(dims_), fill);
}

Mask::Mask(Dims dims, std::vector<std::uint8_t> bits) : dims_(std::move(dims)), bits_(std::move(bits)) {
  check_dims(dims_);
  if (bits_.size() != element_count(dims_)) throw ArgumentError("mask length does not match dims");
  if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; }))
    throw ArgumentError("mask entries must be 0 or 1");
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Observation::Observation(DenseTensor v, Mask m) : values(std::move(v)), mask(std::move(m)) {
  check_same_dims(values.dims(), mask.dims(), "observation");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!mask.observed(i) && values[i] != 0.0) throw ArgumentError("observation has nonzero values outside the mask");
}

Observation Observation::sample(const DenseTensor& truth, const Mask& mask) {
  return Observation(project_mask(truth, mask), mask);
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  check_mode(mode, t.order());
  const ModeSplit s = split_at(t.dims(), mode);
  Matrix m(s.extent, s.left * s.right);
  const auto data = t.data();
  // Column index of (a, i, b) is a + left * b.
  for (std::size_t b = 0; b < s.right; ++b)
    for (std::size_t i = 0; i < s.extent; ++i) {
      const double* src = data.data() + s.left * (i + s.extent * b);
      for (std::size_t a = 0; a < s.left; ++a) m(i, a + s.left * b) = src[a];
    }
  return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Dims& dims) {
  check_dims(dims);
  check_mode(mode, dims.size());
  const ModeSplit s = split_at(dims, mode);
  if (static_cast<std::size_t>(m.rows()) != s.extent || static_cast<std::size_t>(m.cols()) != s.left * s.right)
    throw ArgumentError("fold: matrix shape does not match dims for mode " + std::to_string(mode));
  DenseTensor t(dims);
  auto data = t.data();
  for (std::size_t b = 0; b < s.right; ++b)
    for (std::size_t i = 0; i < s.extent; ++i) {
      double* dst = data.data() + s.left * (i + s.extent * b);
      for (std::size_t a = 0; a < s.left; ++a) dst[a] = m(i, a + s.left * b);
    }
  return t;
}

DenseTensor mode_n_product(const DenseTensor& t, const Matrix& u, std::size_t mode) {
  check_mode(mode, t.order());
  if (static_cast<std::size_t>(u.cols()) != t.extent(mode))
    throw ArgumentError("mode_n_product: matrix columns must equal the mode extent");
  Dims out = t.dims();
  out[mode - 1] = static_cast<std::size_t>(u.rows());
  return fold(u * unfold(t, mode), mode, out);
}

double frobenius_norm(const DenseTensor& t) {
  double sum = 0.0;
  for (double v : t.data()) sum += v * v;
  return std::sqrt(sum);
}

double inner_product(const DenseTensor& a, const DenseTensor& b) {
  check_same_dims(a.dims(), b.dims(), "inner_product");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

DenseTensor project_mask(const DenseTensor& t, const Mask& mask) {
  check_same_dims(t.dims(), mask.dims(), "project_mask");
  DenseTensor out(t.dims());
  for (std::size_t i = 0; i < t.size(); ++i)
    if (mask.observed(i)) out[i] = t[i];
  return out;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  check_same_dims(a.dims(), b.dims(), "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

bool all_finite(const DenseTensor& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace qrtc
