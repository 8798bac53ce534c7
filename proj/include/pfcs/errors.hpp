#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pfcs {

/// Base of every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedPrefix : public Error {
 public:
  using Error::Error;
};

/// A textual prefix had host bits set below its length.
class NonCanonicalPrefix : public Error {
 public:
  using Error::Error;
};

class UnknownCachePrefix : public Error {
 public:
  using Error::Error;
};

class UnknownRoute : public Error {
 public:
  using Error::Error;
};

/// An install would break the pairwise-disjointness of a cache tier.
/// Raised only when the engine itself is inconsistent.
class OverlapViolation : public Error {
 public:
  using Error::Error;
};

class SequenceGap : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Input text rejected at a given 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string reason)
      : Error("line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(std::move(reason)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace pfcs
