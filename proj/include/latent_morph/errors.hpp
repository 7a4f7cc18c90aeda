#pragma once

#include <stdexcept>
#include <string>

namespace latent_morph {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text or file (JSON, CSV, npy).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Operands whose space, layer count or dimension disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant (non-finite, out of bounds, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A named entity (landmark key, direction, measurement) was not found.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace latent_morph
