#pragma once

#include "amt/tensor.hpp"

namespace amt {

inline constexpr double kPsnrCap = 99.0;
inline constexpr double kCharbonnierEps = 1e-3;

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double charbonnier = 0.0;
  double census = 0.0;
  double combined = 0.0;
};

/// -10 log10(MSE) with peak 1; identical inputs report kPsnrCap.
double psnr(const Tensor& a, const Tensor& b);

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, evaluated over valid window positions and averaged over
/// channels. Requires both spatial sides >= 11.
double ssim(const Tensor& a, const Tensor& b);

/// Mean of sqrt((a - b)^2 + eps^2).
double charbonnier(const Tensor& a, const Tensor& b, double eps = kCharbonnierEps);

/// Soft census distance over 7x7 patches of the luma image (x255), averaged
/// over pixels whose whole patch lies inside the image.
double census_loss(const Tensor& a, const Tensor& b);

double combined_content_loss(const Tensor& a, const Tensor& b, double lambda_char = 1.0,
                             double lambda_census = 1.0);

MetricReport evaluate_metrics(const Tensor& prediction, const Tensor& target);

}  // namespace amt
