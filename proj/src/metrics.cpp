#include "qrtc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qrtc/errors.hpp"

namespace qrtc {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError(std::string(what) + ": shape mismatch");
}

Eigen::VectorXd gaussian_window() {
  Eigen::VectorXd w(kWindow);
  const int half = kWindow / 2;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - half;
    w(i) = std::exp(-d * d / (2.0 * kSigma * kSigma));
  }
  return w / w.sum();
}

// Valid-region separable filtering: out(i, j) = sum_ab w(a) w(b) in(i+a, j+b).
Matrix filter_valid(const Matrix& in, const Eigen::VectorXd& w) {
  const auto rows = in.rows() - kWindow + 1;
  const auto cols = in.cols() - kWindow + 1;
  Matrix tmp = Matrix::Zero(rows, in.cols());
  for (int a = 0; a < kWindow; ++a) tmp += w(a) * in.middleRows(a, rows);
  Matrix out = Matrix::Zero(rows, cols);
  for (int b = 0; b < kWindow; ++b) out += w(b) * tmp.middleCols(b, cols);
  return out;
}

double mean_squared_error(const Matrix& a, const Matrix& b) { return (a - b).squaredNorm() / static_cast<double>(a.size()); }

}  // namespace

Matrix band_slice(const DenseTensor& t, std::size_t band_mode, std::size_t index) {
  const std::size_t bands = t.extent(band_mode);
  if (index < 1 || index > bands) throw ArgumentError("band index " + std::to_string(index) + " out of range");
  const Matrix unfolded = unfold(t, band_mode);
  std::size_t rows = 1;
  for (std::size_t k = 1; k <= t.order(); ++k)
    if (k != band_mode) {
      rows = t.extent(k);
      break;
    }
  const auto cols = unfolded.cols() / static_cast<Eigen::Index>(rows);
  Matrix slice(static_cast<Eigen::Index>(rows), cols);
  const auto row = unfolded.row(static_cast<Eigen::Index>(index - 1));
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < slice.rows(); ++i) slice(i, j) = row(i + slice.rows() * j);
  return slice;
}

double psnr(const Matrix& ref, const Matrix& est, double peak) {
  check_same_shape(ref, est, "psnr");
  if (!(peak > 0.0)) throw ArgumentError("psnr: peak must be positive");
  const double mse = mean_squared_error(ref, est);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Matrix& ref, const Matrix& est, double peak) {
  check_same_shape(ref, est, "ssim");
  if (ref.rows() < kWindow || ref.cols() < kWindow) throw ArgumentError("ssim: bands must be at least 11x11");
  const double c1 = (kK1 * peak) * (kK1 * peak);
  const double c2 = (kK2 * peak) * (kK2 * peak);
  const Eigen::VectorXd w = gaussian_window();

  const Matrix mu_x = filter_valid(ref, w);
  const Matrix mu_y = filter_valid(est, w);
  const Matrix xx = filter_valid(ref.cwiseProduct(ref), w);
  const Matrix yy = filter_valid(est.cwiseProduct(est), w);
  const Matrix xy = filter_valid(ref.cwiseProduct(est), w);

  const auto mx = mu_x.array();
  const auto my = mu_y.array();
  const auto var_x = xx.array() - mx * mx;
  const auto var_y = yy.array() - my * my;
  const auto cov = xy.array() - mx * my;
  const Eigen::ArrayXXd map = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                              ((mx * mx + my * my + c1) * (var_x + var_y + c2));
  return map.mean();
}

double ergas(const DenseTensor& ref, const DenseTensor& est, std::size_t band_mode) {
  if (ref.dims() != est.dims()) throw ArgumentError("ergas: dimension mismatch");
  const Matrix r = unfold(ref, band_mode);
  const Matrix e = unfold(est, band_mode);
  const auto per_band = static_cast<double>(r.cols());
  double sum = 0.0;
  for (Eigen::Index b = 0; b < r.rows(); ++b) {
    const double mean = r.row(b).sum() / per_band;
    if (mean == 0.0) throw ArgumentError("ergas: band " + std::to_string(b + 1) + " has zero mean");
    const double rmse = std::sqrt((r.row(b) - e.row(b)).squaredNorm() / per_band);
    sum += (rmse / mean) * (rmse / mean);
  }
  return 100.0 * std::sqrt(sum / static_cast<double>(r.rows()));
}

QualityRecord evaluate(const DenseTensor& ref, const DenseTensor& est, std::size_t band_mode) {
  if (ref.dims() != est.dims()) throw ArgumentError("evaluate: dimension mismatch");
  const std::size_t bands = ref.extent(band_mode);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  QualityRecord q;
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  bool ssim_defined = true;
  for (std::size_t b = 1; b <= bands; ++b) {
    const Matrix r = band_slice(ref, band_mode, b);
    const Matrix e = band_slice(est, band_mode, b);
    psnr_sum += psnr(r, e);
    if (r.rows() >= kWindow && r.cols() >= kWindow)
      ssim_sum += ssim(r, e);
    else
      ssim_defined = false;
  }
  q.mpsnr = psnr_sum / static_cast<double>(bands);
  q.mssim = ssim_defined ? ssim_sum / static_cast<double>(bands) : nan;
  try {
    q.ergas = ergas(ref, est, band_mode);
  } catch (const ArgumentError&) {
    q.ergas = nan;
  }
  return q;
}

}  // namespace qrtc
