// Copyright 2026 The DECN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DECN_ERROR_HPP
#define DECN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace decn {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, or a numeric failure during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

class InvalidKernelError : public Error {
 public:
  using Error::Error;
};

// Kernel too large for the symmetric padding of the lattice.
class PaddingOverflowError : public Error {
 public:
  using Error::Error;
};

class UnknownLeafError : public Error {
 public:
  using Error::Error;
};

class NotEvaluatedError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or incompatible file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace decn

#endif  // DECN_ERROR_HPP
