// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lensinspect {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor / layer shape contract violated.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Bad argument outside any shape contract (thresholds, eps, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Dataset, label or image problems.
class DataError : public Error {
 public:
  using Error::Error;
};

// Weights or graph problems (missing entries, non-finite activations, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace lensinspect
