#include "hsidn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsidn {

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kWindowSigma = 1.5;
constexpr double kSpectrumFloor = 1e-12;

void check_same_dims(const HsiCube& ref, const HsiCube& test) {
  if (!ref.same_dims(test)) {
    throw DimensionMismatch("metric inputs differ in dims");
  }
}

// Edge-inclusive mirror: [a b c] pads to ... b a | a b c | c b ...
int mirror(int i, int n) {
  if (i < 0) return -1 - i;
  if (i >= n) return 2 * n - 1 - i;
  return i;
}

double band_psnr(const HsiCube& ref, const HsiCube& test, int band,
                 double peak) {
  const int m = ref.rows(), n = ref.cols();
  double sq = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = ref(i, j, band) - test(i, j, band);
      sq += d * d;
    }
  }
  const double mse = sq / (static_cast<double>(m) * n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double band_ssim(const HsiCube& ref, const HsiCube& test, int band,
                 const Eigen::MatrixXd& window) {
  const int m = ref.rows(), n = ref.cols();
  const double c1 = 0.01 * 0.01;  // (0.01*peak)^2, peak = 1
  const double c2 = 0.03 * 0.03;
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
      for (int di = -kHalf; di <= kHalf; ++di) {
        const int ii = mirror(i + di, m);
        for (int dj = -kHalf; dj <= kHalf; ++dj) {
          const int jj = mirror(j + dj, n);
          const double w = window(di + kHalf, dj + kHalf);
          const double x = ref(ii, jj, band);
          const double y = test(ii, jj, band);
          mx += w * x;
          my += w * y;
          xx += w * x * x;
          yy += w * y * y;
          xy += w * x * y;
        }
      }
      const double vx = xx - mx * mx;
      const double vy = yy - my * my;
      const double cov = xy - mx * my;
      const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
      const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      total += num / den;
    }
  }
  return total / (static_cast<double>(m) * n);
}

Eigen::MatrixXd gaussian_window() {
  Eigen::MatrixXd w(kWindow, kWindow);
  for (int i = 0; i < kWindow; ++i) {
    for (int j = 0; j < kWindow; ++j) {
      const double di = i - kHalf, dj = j - kHalf;
      w(i, j) = std::exp(-(di * di + dj * dj) /
                         (2.0 * kWindowSigma * kWindowSigma));
    }
  }
  return w / w.sum();
}

}  // namespace

double psnr(const HsiCube& ref, const HsiCube& test, double peak) {
  check_same_dims(ref, test);
  if (!(peak > 0.0)) {
    throw InvalidParams("psnr peak must be positive");
  }
  double sum = 0.0;
  int finite = 0;
  for (int b = 0; b < ref.bands(); ++b) {
    const double v = band_psnr(ref, test, b, peak);
    if (std::isinf(v)) continue;
    sum += v;
    ++finite;
  }
  if (finite == 0) return std::numeric_limits<double>::infinity();
  return sum / finite;
}

double ssim(const HsiCube& ref, const HsiCube& test) {
  check_same_dims(ref, test);
  if (ref.rows() < kWindow || ref.cols() < kWindow) {
    throw SpatialTooSmall("ssim requires spatial dims >= 11");
  }
  const Eigen::MatrixXd window = gaussian_window();
  double total = 0.0;
  for (int b = 0; b < ref.bands(); ++b) {
    total += band_ssim(ref, test, b, window);
  }
  return total / ref.bands();
}

namespace {

// Angle between the two spectra at pixel (i,j) via Kahan's formula
// 2*atan2(|u-v|, |u+v|) on the normalized vectors: exact at zero angle and
// well conditioned near 0 and pi, unlike acos of the cosine. Returns a
// negative value when either spectrum norm is at or below the floor.
double pixel_angle(const HsiCube& ref, const HsiCube& test, int i, int j) {
  const int bands = ref.bands();
  double rr = 0.0, tt = 0.0;
  for (int b = 0; b < bands; ++b) {
    rr += ref(i, j, b) * ref(i, j, b);
    tt += test(i, j, b) * test(i, j, b);
  }
  const double nr = std::sqrt(rr), nt = std::sqrt(tt);
  if (nr <= kSpectrumFloor || nt <= kSpectrumFloor) return -1.0;
  double diff = 0.0, sum = 0.0;
  for (int b = 0; b < bands; ++b) {
    const double u = ref(i, j, b) / nr;
    const double v = test(i, j, b) / nt;
    diff += (u - v) * (u - v);
    sum += (u + v) * (u + v);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

}  // namespace

double sam(const HsiCube& ref, const HsiCube& test) {
  check_same_dims(ref, test);
  const int m = ref.rows(), n = ref.cols();
  double total = 0.0;
  long counted = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double angle = pixel_angle(ref, test, i, j);
      if (angle < 0.0) continue;
      total += angle;
      ++counted;
    }
  }
  return counted == 0 ? 0.0 : total / counted;
}

MetricsReport evaluate_all(const HsiCube& ref, const HsiCube& test,
                           double peak) {
  check_same_dims(ref, test);
  if (ref.rows() < kWindow || ref.cols() < kWindow) {
    throw SpatialTooSmall("ssim requires spatial dims >= 11");
  }
  MetricsReport report;
  const Eigen::MatrixXd window = gaussian_window();
  double psnr_sum = 0.0, ssim_sum = 0.0;
  int psnr_finite = 0;
  for (int b = 0; b < ref.bands(); ++b) {
    const double p = band_psnr(ref, test, b, peak);
    report.per_band_psnr.push_back(p);
    if (std::isinf(p)) {
      ++report.psnr_infinite_bands;
    } else {
      psnr_sum += p;
      ++psnr_finite;
    }
    const double s = band_ssim(ref, test, b, window);
    report.per_band_ssim.push_back(s);
    ssim_sum += s;
  }
  report.psnr_db = psnr_finite == 0
                       ? std::numeric_limits<double>::infinity()
                       : psnr_sum / psnr_finite;
  report.ssim = ssim_sum / ref.bands();

  // Recompute SAM with the skip counter.
  const int m = ref.rows(), n = ref.cols();
  double total = 0.0;
  long counted = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double angle = pixel_angle(ref, test, i, j);
      if (angle < 0.0) {
        ++report.sam_skipped_pixels;
        continue;
      }
      total += angle;
      ++counted;
    }
  }
  report.sam_rad = counted == 0 ? 0.0 : total / counted;
  return report;
}

}  // namespace hsidn
