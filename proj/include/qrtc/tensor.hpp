#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qrtc {

using Matrix = Eigen::MatrixXd;
using Dims = std::vector<std::size_t>;

std::size_t element_count(const Dims& dims);

// Dense N-th order real tensor. Storage is first-index-fastest, so the
// mode-1 unfolding is the flat buffer read column-major.
//
// Semantic indices and mode numbers are 1-based throughout the public API.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Dims dims);
  DenseTensor(Dims dims, std::vector<double> data);

  static DenseTensor filled(Dims dims, double value);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t extent(std::size_t mode) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  // Flat offset of a 1-based multi-index.
  std::size_t offset(std::span<const std::size_t> index) const;
  double& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
  double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  double& at(std::initializer_list<std::size_t> index) { return at(std::span(index.begin(), index.size())); }
  double at(std::initializer_list<std::size_t> index) const { return at(std::span(index.begin(), index.size())); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator-=(const DenseTensor& other);
  DenseTensor& operator*=(double scale);

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Dims dims_;
  std::vector<double> data_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double scale, DenseTensor a);

// Binary observation pattern, stored densely with the tensor layout.
class Mask {
 public:
  Mask() = default;
  explicit Mask(Dims dims, std::uint8_t fill = 0);
  Mask(Dims dims, std::vector<std::uint8_t> bits);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return bits_.size(); }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  bool observed(std::size_t flat) const { return bits_[flat] != 0; }
  void set(std::size_t flat, bool value) { bits_[flat] = value ? 1 : 0; }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  Dims dims_;
  std::vector<std::uint8_t> bits_;
};

// Observed values (zero off the mask) together with the mask.
struct Observation {
  DenseTensor values;
  Mask mask;

  Observation(DenseTensor values, Mask mask);
  static Observation sample(const DenseTensor& truth, const Mask& mask);
};

Matrix unfold(const DenseTensor& t, std::size_t mode);
DenseTensor fold(const Matrix& m, std::size_t mode, const Dims& dims);
DenseTensor mode_n_product(const DenseTensor& t, const Matrix& u, std::size_t mode);

double frobenius_norm(const DenseTensor& t);
double inner_product(const DenseTensor& a, const DenseTensor& b);
DenseTensor project_mask(const DenseTensor& t, const Mask& mask);
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

bool all_finite(const DenseTensor& t);

}  // namespace qrtc
