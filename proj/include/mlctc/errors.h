// include/mlctc/errors.h

// Copyright 2026  mlctc authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MLCTC_ERRORS_H_
#define MLCTC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mlctc {

/// Base class of every error thrown by the library. The CLI maps these to
/// exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Dimension or tensor-layout mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Unknown symbol, language, tensor name, or utterance id.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// The label sequence cannot be aligned to the available frames.
class AlignmentInfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration guard exceeded.
class InstanceTooLargeError : public Error {
 public:
  using Error::Error;
};

/// Model bound to a different phone-set version than the one supplied.
class StaleModelError : public Error {
 public:
  using Error::Error;
};

/// A gradient or parameter became non-finite.
class DivergedTrainingError : public Error {
 public:
  using Error::Error;
};

/// Every utterance of a minibatch was skipped.
class EmptyBatchError : public Error {
 public:
  using Error::Error;
};

/// Synthetic data generation could not satisfy its constraints.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or record.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlctc

#endif  // MLCTC_ERRORS_H_
