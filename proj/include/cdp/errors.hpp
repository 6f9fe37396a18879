#pragma once

#include <stdexcept>
#include <string>

namespace cdp {

/// Alphabet sizes of two objects do not line up.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A mass vector, channel row or prior pair is not a valid distribution.
class InvalidDistribution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Two mixtures cannot be blended (different priors or alphabets).
class InvalidMixture : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An enumeration would exceed its cardinality bound.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

}  // namespace cdp
