// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace rankstego {

// Root of every error the library throws. The CLI maps subclasses to exit
// codes, so new error kinds should derive from the closest existing class.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied parameter outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Rank or token index outside the vocabulary.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ContextOverflowError : public Error {
 public:
  using Error::Error;
};

// Inference endpoint could not be reached.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Inference endpoint answered with something that is not the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Well-formed data that breaks a distribution invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

// Malformed model or codebook container.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Message did not fit within the generation cap.
class CapacityExhaustedError : public Error {
 public:
  using Error::Error;
};

// Sender and receiver disagree on model, context, key, or parameters.
class DesyncError : public Error {
 public:
  using Error::Error;
};

}  // namespace rankstego
