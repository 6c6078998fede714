#pragma once

#include <vector>

#include "hsidn/cube.hpp"

namespace hsidn {

/// Full-reference quality summary. PSNR and SSIM are band means, SAM is the
/// mean spectral angle over pixels (radians). Bands with zero MSE contribute
/// the +inf sentinel and are excluded from the PSNR mean (counted in
/// psnr_infinite_bands); pixels where either spectrum has norm <= 1e-12 are
/// skipped by SAM (counted in sam_skipped_pixels).
struct MetricsReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  double sam_rad = 0.0;
  std::vector<double> per_band_psnr;
  std::vector<double> per_band_ssim;
  int psnr_infinite_bands = 0;
  long sam_skipped_pixels = 0;
};

/// Mean over bands of 10*log10(peak^2 / MSE_band).
double psnr(const HsiCube& ref, const HsiCube& test, double peak = 1.0);

/// Mean over bands of windowed SSIM: 11x11 Gaussian window (sigma 1.5),
/// C1=(0.01*peak)^2, C2=(0.03*peak)^2 with peak=1, symmetric
/// (edge-inclusive mirror) boundary handling. Requires M,N >= 11.
double ssim(const HsiCube& ref, const HsiCube& test);

/// Mean spectral angle arccos(<r,t>/(|r||t|)) over pixels, in radians.
double sam(const HsiCube& ref, const HsiCube& test);

MetricsReport evaluate_all(const HsiCube& ref, const HsiCube& test,
                           double peak = 1.0);

}  // namespace hsidn
