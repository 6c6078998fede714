#pragma once

#include <stdexcept>
#include <string>

namespace hsidn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape / value errors shared across modules.
struct DimensionMismatch : Error { using Error::Error; };
struct NonFiniteData : Error { using Error::Error; };
struct NegativeThreshold : Error { using Error::Error; };
struct NonpositiveRho : Error { using Error::Error; };
struct RankOutOfRange : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };

// Noise simulation.
struct NegativeVariance : Error { using Error::Error; };
struct FractionOutOfRange : Error { using Error::Error; };
struct UnknownCase : Error { using Error::Error; };
struct UnknownSweep : Error { using Error::Error; };

// Solver.
struct EmptyInput : Error { using Error::Error; };
struct NonFiniteState : Error { using Error::Error; };
struct NonpositiveParameter : Error { using Error::Error; };

// Metrics.
struct SpatialTooSmall : Error { using Error::Error; };

// Persistence.
struct BadMagic : Error { using Error::Error; };
struct UnsupportedVersion : Error { using Error::Error; };
struct UnsupportedDtype : Error { using Error::Error; };
struct TruncatedPayload : Error { using Error::Error; };
struct DimOverflow : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct UnknownPreset : Error { using Error::Error; };

}  // namespace hsidn
