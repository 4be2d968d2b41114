#include "amt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace amt {
namespace {

void check_pair(const Tensor& a, const Tensor& b, const char* what) {
  require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          std::string(what) + ": shapes differ: " + to_string(a.shape()) + " vs " +
              to_string(b.shape()));
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr int kCensusRadius = 3;

std::vector<double> gaussian_taps() {
  std::vector<double> g(kSsimWindow);
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable "valid" Gaussian filter of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int oh = h - k + 1;
  const int ow = w - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += taps[i] * src[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += taps[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

std::vector<double> luma255(const Tensor& img, int n) {
  const auto r = img.plane(n, 0);
  const auto g = img.plane(n, 1);
  const auto b = img.plane(n, 2);
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]) * 255.0;
  }
  return out;
}

double soft_sign(double d) { return d / std::sqrt(0.81 + d * d); }

}  // namespace

double psnr(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "psnr");
  require(a.size() > 0, ErrorCode::kInvalidArgument, "psnr: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double ssim(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "ssim");
  require(a.h() >= kSsimWindow && a.w() >= kSsimWindow, ErrorCode::kInvalidArgument,
          "ssim: inputs must be at least 11x11");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto taps = gaussian_taps();
  const int h = a.h();
  const int w = a.w();
  double total = 0.0;
  int planes = 0;
  for (int n = 0; n < a.n(); ++n) {
    for (int c = 0; c < a.c(); ++c) {
      const auto pa = a.plane(n, c);
      const auto pb = b.plane(n, c);
      std::vector<double> va(pa.begin(), pa.end());
      std::vector<double> vb(pb.begin(), pb.end());
      std::vector<double> aa(va.size()), bb(va.size()), ab(va.size());
      for (std::size_t i = 0; i < va.size(); ++i) {
        aa[i] = va[i] * va[i];
        bb[i] = vb[i] * vb[i];
        ab[i] = va[i] * vb[i];
      }
      const auto mu_a = filter_valid(va, h, w, taps);
      const auto mu_b = filter_valid(vb, h, w, taps);
      const auto e_aa = filter_valid(aa, h, w, taps);
      const auto e_bb = filter_valid(bb, h, w, taps);
      const auto e_ab = filter_valid(ab, h, w, taps);
      double sum = 0.0;
      for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double var_a = e_aa[i] - ma * ma;
        const double var_b = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      }
      total += sum / static_cast<double>(mu_a.size());
      ++planes;
    }
  }
  return total / planes;
}

double charbonnier(const Tensor& a, const Tensor& b, double eps) {
  check_pair(a, b, "charbonnier");
  require(a.size() > 0, ErrorCode::kInvalidArgument, "charbonnier: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sum += std::sqrt(d * d + eps * eps);
  }
  return sum / static_cast<double>(a.size());
}

double census_loss(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "census_loss");
  require(a.c() == 3, ErrorCode::kShapeMismatch, "census_loss: inputs must have 3 channels");
  const int k = 2 * kCensusRadius + 1;
  require(a.h() >= k && a.w() >= k, ErrorCode::kInvalidArgument,
          "census_loss: inputs must be at least 7x7");
  const int h = a.h();
  const int w = a.w();
  double total = 0.0;
  std::size_t pixels = 0;
  for (int n = 0; n < a.n(); ++n) {
    const auto ga = luma255(a, n);
    const auto gb = luma255(b, n);
    for (int y = kCensusRadius; y < h - kCensusRadius; ++y) {
      for (int x = kCensusRadius; x < w - kCensusRadius; ++x) {
        const std::size_t centre = static_cast<std::size_t>(y) * w + x;
        double dist = 0.0;
        for (int dy = -kCensusRadius; dy <= kCensusRadius; ++dy) {
          for (int dx = -kCensusRadius; dx <= kCensusRadius; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const std::size_t nb = static_cast<std::size_t>(y + dy) * w + (x + dx);
            const double q = soft_sign(ga[nb] - ga[centre]) - soft_sign(gb[nb] - gb[centre]);
            dist += q * q / (0.1 + q * q);
          }
        }
        total += dist;
        ++pixels;
      }
    }
  }
  return total / static_cast<double>(pixels);
}

double combined_content_loss(const Tensor& a, const Tensor& b, double lambda_char,
                             double lambda_census) {
  return lambda_char * charbonnier(a, b) + lambda_census * census_loss(a, b);
}

MetricReport evaluate_metrics(const Tensor& prediction, const Tensor& target) {
  MetricReport r;
  r.psnr = psnr(prediction, target);
  r.ssim = ssim(prediction, target);
  r.charbonnier = charbonnier(prediction, target);
  r.census = census_loss(prediction, target);
  r.combined = r.charbonnier + r.census;
  return r;
}

}  // namespace amt
