#pragma once

#include <stdexcept>
#include <string>

namespace qrtc {

/// Precondition violated by the caller (bad mode, shape mismatch, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FormatErrorKind { bad_magic, unsupported_version, truncated, type_mismatch, malformed };

/// A file could not be decoded.
class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

/// Filesystem-level failure (cannot open, cannot write).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qrtc
