#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hsidn/cube.hpp"

namespace hsidn {

/// Declarative description of one mixed-noise injection. Identical spec +
/// identical input produce a bit-identical noisy cube.
struct NoiseSpec {
  double gaussian_variance = 0.0;      // sigma^2, intensity units^2
  double impulse_fraction = 0.0;       // fraction of pixels per band
  double deadline_fraction = 0.0;      // fraction of columns per affected band
  double affected_band_fraction = 1.0 / 3.0;
  std::uint64_t seed = 0;
};

// Stage tags for sub-seed derivation: stage seed = derive_seed(master, tag),
// per-band stream = derive_seed(stage_seed, 1 + band). Deadline band
// selection uses derive_seed(stage_seed, 0).
inline constexpr std::uint64_t kStageGaussian = 0;
inline constexpr std::uint64_t kStageImpulse = 1;
inline constexpr std::uint64_t kStageDeadline = 2;
inline constexpr std::uint64_t kStageSweepPoint = 3;

/// y = x + n, n i.i.d. normal(0, variance). Output is not clipped.
HsiCube add_gaussian(const HsiCube& x, double variance, std::uint64_t seed);

/// Per band, a uniformly random floor(fraction*M*N)-subset of pixels is set
/// to 0 or 1 with equal probability.
HsiCube add_salt_pepper(const HsiCube& x, double fraction, std::uint64_t seed);

/// A ceil(affected_band_fraction*B)-subset of bands is chosen uniformly; in
/// each chosen band a floor(deadline_fraction*N)-subset of columns is set to
/// `stripe_offset` (default 0: classic full-height deadlines) across all rows.
HsiCube add_deadlines(const HsiCube& x, double deadline_fraction,
                      double affected_band_fraction, std::uint64_t seed,
                      double stripe_offset = 0.0);

/// Gaussian -> impulse -> deadline with stage sub-seeds derived from
/// spec.seed. The composition order is fixed.
HsiCube apply_spec(const HsiCube& x, const NoiseSpec& spec,
                   double stripe_offset = 0.0);

/// The five benchmark scenarios. Case table (variance, impulse, deadline):
/// 1: (0.1, 0.15, 0);  2: (0.1, 0, 0.2);  3: (0.2, 0.10, 0.10);
/// 4: (0.1, 0.20, 0.20);  5: (0.15, 0.15, 0.15).
std::pair<HsiCube, NoiseSpec> apply_case(const HsiCube& x, int case_id,
                                         std::uint64_t seed);

NoiseSpec case_spec(int case_id, std::uint64_t seed);

enum class SweepKind { Impulse, Gaussian };

SweepKind parse_sweep(const std::string& name);

/// Ten-point contamination schedules:
///  - Impulse: salt-and-pepper fraction 0.05..0.50 in steps of 0.05.
///  - Gaussian: sigma (std dev) 0.05..0.50 in steps of 0.05, stored as
///    variance sigma^2, with fixed 5% impulse and 5% stripe noise.
std::vector<std::pair<HsiCube, NoiseSpec>> gradient_sweep(const HsiCube& x,
                                                          SweepKind kind,
                                                          std::uint64_t seed);

}  // namespace hsidn
