#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace themekit {

// Error taxonomy shared across the toolkit. The CLI maps each class to a
// distinct process exit code (see tools/).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied configuration: missing files, invalid ranges, bad flags.
class ConfigError : public Error {
  using Error::Error;
};

// Malformed input that could not be parsed at all. Carries the byte offset
// of the first offending position when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t byte_offset = 0)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Parseable input that violates the documented schema (missing/ill-typed
// fields, unknown enum values).
class SchemaError : public Error {
  using Error::Error;
};

// Structurally valid input that breaks a corpus-level invariant, e.g.
// duplicate identifiers.
class IntegrityError : public Error {
  using Error::Error;
};

// A reference (uid, conversation id, ...) that does not resolve.
class ResolutionError : public Error {
  using Error::Error;
};

// A well-formed file whose payload is unusable: dimension mismatches,
// non-finite numbers, missing template slots.
class FormatError : public Error {
  using Error::Error;
};

// An operation applied outside its mathematical domain.
class DomainError : public Error {
  using Error::Error;
};

// A remote provider failed after the configured retries, or answered with
// something unusable.
class ProviderError : public Error {
  using Error::Error;
};

// Raised when token-level embeddings are requested from a provider that only
// supports sequence mode. Callers typically downgrade this to a warning.
class TokenModeUnsupported : public ProviderError {
  using ProviderError::ProviderError;
};

}  // namespace themekit
