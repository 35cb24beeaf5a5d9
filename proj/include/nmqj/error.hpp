// Copyright 2026 The nmqj Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmqj {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural problem with a model (indices, dimensions, Hermiticity).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Numerical guard tripped during propagation. The CLI maps these to exit 2.
class NumericalGuard : public Error {
 public:
  using Error::Error;
};

class NonPositiveStep : public NumericalGuard {
 public:
  explicit NonPositiveStep(double dt)
      : NumericalGuard("time step must be positive, got " + std::to_string(dt)), dt_(dt) {}
  double dt() const noexcept { return dt_; }

 private:
  double dt_;
};

/// A per-step probability left its admissible range; dt must shrink.
class StepTooLarge : public NumericalGuard {
 public:
  StepTooLarge(double time, double dt, const std::string& what)
      : NumericalGuard("step too large at t=" + std::to_string(time) + " (dt=" +
                       std::to_string(dt) + "): " + what),
        time_(time),
        dt_(dt) {}
  double time() const noexcept { return time_; }
  double dt() const noexcept { return dt_; }

 private:
  double time_;
  double dt_;
};

/// A selected jump branch had zero amplitude. Indicates a partition bug.
class ZeroNormJump : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};

/// <psi|A|psi> or Tr(A rho) carried an imaginary part beyond tolerance.
class ImaginaryResidue : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};

/// Density-matrix invariant breached during deterministic integration.
class IntegrationError : public NumericalGuard {
 public:
  IntegrationError(double time, const std::string& what)
      : NumericalGuard("integration invariant breached at t=" + std::to_string(time) + ": " +
                       what),
        time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Thrown by run_ensemble with the original failure nested inside.
class TrajectoryFailure : public Error {
 public:
  explicit TrajectoryFailure(std::size_t index)
      : Error("trajectory " + std::to_string(index) + " failed"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Two time series were combined on different grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Config parse/semantic failure. Message carries line/column or field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nmqj
