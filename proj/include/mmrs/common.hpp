// Copyright 2026 The mmrs Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace mmrs {

using Index = Eigen::Index;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecXd = Vec<double>;
using MatXd = Mat<double>;

/// Label type for stage outcomes: +1 positive feedback, -1 negative.
using Label = int;

enum class ErrorKind {
  kInvalidArgument,
  kMalformedFile,
  kChainViolation,
  kEmptyOmega,
  kSchemaMismatch,
  kCorruptModel,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kMalformedFile: return "malformed file";
    case ErrorKind::kChainViolation: return "monotonic chain violation";
    case ErrorKind::kEmptyOmega: return "empty training set";
    case ErrorKind::kSchemaMismatch: return "schema mismatch";
    case ErrorKind::kCorruptModel: return "corrupt model file";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

/// Sign with the negative tie-break: sign(0) = -1.
template <typename Scalar>
inline Label sign_label(Scalar v) {
  return v > Scalar(0) ? 1 : -1;
}

/// Hinge loss (1 - u)_+.
template <typename Scalar>
inline Scalar hinge(Scalar u) {
  return u < Scalar(1) ? Scalar(1) - u : Scalar(0);
}

using Rng = std::mt19937_64;

/// Independent named substream of a master seed ("init", "split", "simulate", ...).
inline Rng substream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

}  // namespace mmrs
