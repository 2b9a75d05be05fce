#pragma once

#include <cstddef>

#include "qrtc/tensor.hpp"

namespace qrtc {

inline constexpr double kPsnrCap = 100.0;

struct QualityRecord {
  double mpsnr = 0.0;      // dB, mean over bands
  double mssim = 0.0;      // mean over bands
  double ergas = 0.0;
  double wall_time = 0.0;  // seconds, filled in by the caller
};

/// Band `index` (1-based) of `t` along `band_mode`, as a matrix whose rows run
/// over the first remaining mode and whose columns run over the rest.
Matrix band_slice(const DenseTensor& t, std::size_t band_mode, std::size_t index);

/// 10 log10(peak^2 / MSE), capped at kPsnrCap (identical inputs give the cap).
double psnr(const Matrix& ref, const Matrix& est, double peak = 1.0);

/// Mean SSIM over all valid 11x11 Gaussian (sigma 1.5) windows,
/// K1 = 0.01, K2 = 0.03. Bands must be at least 11x11.
double ssim(const Matrix& ref, const Matrix& est, double peak = 1.0);

/// 100 * sqrt(mean_b (RMSE_b / mean_b)^2) over the bands along `band_mode`.
/// Throws ArgumentError when a reference band has zero mean.
double ergas(const DenseTensor& ref, const DenseTensor& est, std::size_t band_mode);

/// Per-band PSNR/SSIM averages plus ERGAS, with peak 1. Metrics that are
/// undefined for the data (bands under 11x11, zero band mean) come back NaN.
QualityRecord evaluate(const DenseTensor& ref, const DenseTensor& est, std::size_t band_mode);

}  // namespace qrtc
