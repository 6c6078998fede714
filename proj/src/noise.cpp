#include "hsidn/noise.hpp"

#include <cmath>
#include <string>

#include "hsidn/rng.hpp"

namespace hsidn {

namespace {

void check_fraction(double f, const char* name) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw FractionOutOfRange(std::string(name) + " must lie in [0,1], got " +
                             std::to_string(f));
  }
}

}  // namespace

HsiCube add_gaussian(const HsiCube& x, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0)) {
    throw NegativeVariance("gaussian variance must be nonnegative, got " +
                           std::to_string(variance));
  }
  if (variance == 0.0) return x;
  HsiCube y = x;
  const double sigma = std::sqrt(variance);
  const int m = x.rows(), n = x.cols(), b = x.bands();
  for (int band = 0; band < b; ++band) {
    Rng rng(derive_seed(seed, 1 + static_cast<std::uint64_t>(band)));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        y(i, j, band) += sigma * rng.next_normal();
      }
    }
  }
  return y;
}

HsiCube add_salt_pepper(const HsiCube& x, double fraction,
                        std::uint64_t seed) {
  check_fraction(fraction, "impulse fraction");
  if (fraction == 0.0) return x;
  HsiCube y = x;
  const int m = x.rows(), n = x.cols(), b = x.bands();
  const auto pixels = static_cast<std::uint32_t>(m) * n;
  const auto count =
      static_cast<std::uint32_t>(std::floor(fraction * pixels));
  for (int band = 0; band < b; ++band) {
    Rng rng(derive_seed(seed, 1 + static_cast<std::uint64_t>(band)));
    const auto hit = rng.subset(pixels, count);
    for (auto p : hit) {
      const int i = static_cast<int>(p) / n;
      const int j = static_cast<int>(p) % n;
      y(i, j, band) = rng.coin() ? 1.0 : 0.0;
    }
  }
  return y;
}

HsiCube add_deadlines(const HsiCube& x, double deadline_fraction,
                      double affected_band_fraction, std::uint64_t seed,
                      double stripe_offset) {
  check_fraction(deadline_fraction, "deadline fraction");
  check_fraction(affected_band_fraction, "affected band fraction");
  if (deadline_fraction == 0.0 || affected_band_fraction == 0.0) return x;
  HsiCube y = x;
  const int m = x.rows(), n = x.cols(), b = x.bands();
  const auto band_count = static_cast<std::uint32_t>(
      std::ceil(affected_band_fraction * b));
  const auto col_count =
      static_cast<std::uint32_t>(std::floor(deadline_fraction * n));
  Rng band_rng(derive_seed(seed, 0));
  const auto bands = band_rng.subset(static_cast<std::uint32_t>(b), band_count);
  for (auto band : bands) {
    Rng rng(derive_seed(seed, 1 + static_cast<std::uint64_t>(band)));
    const auto cols = rng.subset(static_cast<std::uint32_t>(n), col_count);
    for (auto col : cols) {
      for (int i = 0; i < m; ++i) {
        y(i, static_cast<int>(col), static_cast<int>(band)) = stripe_offset;
      }
    }
  }
  return y;
}

HsiCube apply_spec(const HsiCube& x, const NoiseSpec& spec,
                   double stripe_offset) {
  HsiCube y = add_gaussian(x, spec.gaussian_variance,
                           derive_seed(spec.seed, kStageGaussian));
  y = add_salt_pepper(y, spec.impulse_fraction,
                      derive_seed(spec.seed, kStageImpulse));
  y = add_deadlines(y, spec.deadline_fraction, spec.affected_band_fraction,
                    derive_seed(spec.seed, kStageDeadline), stripe_offset);
  return y;
}

NoiseSpec case_spec(int case_id, std::uint64_t seed) {
  NoiseSpec spec;
  spec.seed = seed;
  switch (case_id) {
    case 1: spec.gaussian_variance = 0.1;  spec.impulse_fraction = 0.15; spec.deadline_fraction = 0.0;  break;
    case 2: spec.gaussian_variance = 0.1;  spec.impulse_fraction = 0.0;  spec.deadline_fraction = 0.2;  break;
    case 3: spec.gaussian_variance = 0.2;  spec.impulse_fraction = 0.10; spec.deadline_fraction = 0.10; break;
    case 4: spec.gaussian_variance = 0.1;  spec.impulse_fraction = 0.20; spec.deadline_fraction = 0.20; break;
    case 5: spec.gaussian_variance = 0.15; spec.impulse_fraction = 0.15; spec.deadline_fraction = 0.15; break;
    default:
      throw UnknownCase("noise case must be 1..5, got " +
                        std::to_string(case_id));
  }
  return spec;
}

std::pair<HsiCube, NoiseSpec> apply_case(const HsiCube& x, int case_id,
                                         std::uint64_t seed) {
  const NoiseSpec spec = case_spec(case_id, seed);
  return {apply_spec(x, spec), spec};
}

SweepKind parse_sweep(const std::string& name) {
  if (name == "impulse") return SweepKind::Impulse;
  if (name == "gaussian") return SweepKind::Gaussian;
  throw UnknownSweep("sweep must be 'impulse' or 'gaussian', got '" + name +
                     "'");
}

std::vector<std::pair<HsiCube, NoiseSpec>> gradient_sweep(const HsiCube& x,
                                                          SweepKind kind,
                                                          std::uint64_t seed) {
  std::vector<std::pair<HsiCube, NoiseSpec>> out;
  out.reserve(10);
  for (int i = 1; i <= 10; ++i) {
    const double level = 0.05 * i;
    NoiseSpec spec;
    spec.seed = derive_seed(seed, kStageSweepPoint + static_cast<std::uint64_t>(i));
    if (kind == SweepKind::Impulse) {
      spec.impulse_fraction = level;
    } else {
      spec.gaussian_variance = level * level;  // schedule is in sigma
      spec.impulse_fraction = 0.05;
      spec.deadline_fraction = 0.05;
    }
    out.emplace_back(apply_spec(x, spec), spec);
  }
  return out;
}

}  // namespace hsidn
