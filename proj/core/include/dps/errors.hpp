#pragma once

#include <stdexcept>

/**
 * Exception taxonomy for the dps library.
 *
 * Everything the library can signal derives from dps::Error, so callers can
 * catch a single base type at the boundary (the CLI maps any Error to exit
 * code 1). Concrete types mirror the failure classes of each module: model
 * loading and validation, enumeration feasibility, sampling degeneracy,
 * numeric domain violations, geometry preconditions, and remote transport.
 */

namespace dps {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model parsing and validation.
class ParseError : public Error {
 public:
  using Error::Error;
};
class InvalidDistribution : public Error {
 public:
  using Error::Error;
};
class InvalidShape : public Error {
 public:
  using Error::Error;
};

// Scoring, enumeration, estimation.
class PrefixTooLong : public Error {
 public:
  using Error::Error;
};
class ZeroProbability : public Error {
 public:
  using Error::Error;
};
class SpaceTooLarge : public Error {
 public:
  using Error::Error;
};
class DegenerateModel : public Error {
 public:
  using Error::Error;
};
class DegenerateSample : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};

// Surface geometry.
class DimensionError : public Error {
 public:
  using Error::Error;
};
class NotEnoughPoints : public Error {
 public:
  using Error::Error;
};
class CollinearInput : public Error {
 public:
  using Error::Error;
};

// Remote transport.
class TransportError : public Error {
 public:
  using Error::Error;
};
class ProtocolError : public Error {
 public:
  using Error::Error;
};
class AuthError : public Error {
 public:
  using Error::Error;
};
class CapabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace dps
