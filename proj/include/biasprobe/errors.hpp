#pragma once

#include <stdexcept>
#include <string>

namespace biasprobe {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct DegenerateRatings : Error { using Error::Error; };
struct MissingRatings : Error { using Error::Error; };
struct ZeroVariance : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct EmptyData : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct InvalidCounts : Error { using Error::Error; };
struct DegenerateCovariance : Error { using Error::Error; };
struct MissingEmbedding : Error { using Error::Error; };
struct TooManySegments : Error { using Error::Error; };
struct ScorerFailure : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };

} // namespace biasprobe
