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

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace nmqj {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Non-normalized d x d density matrices, one per component.
using DensityComponents = std::vector<ComplexMatrix>;

inline constexpr Complex kI{0.0, 1.0};

inline double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// max |A - A^dagger|
inline double hermiticity_defect(const ComplexMatrix& a) {
  return max_abs(a - a.adjoint());
}

inline bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Complex z = a.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

/// <v|A|v> without temporaries. Hot path of the jump engine.
inline Complex quad_form(const ComplexMatrix& a, const StateVector& v) {
  const Eigen::Index d = v.size();
  Complex acc{0.0, 0.0};
  for (Eigen::Index c = 0; c < d; ++c) {
    Complex col{0.0, 0.0};
    for (Eigen::Index r = 0; r < d; ++r) col += std::conj(v[r]) * a(r, c);
    acc += col * v[c];
  }
  return acc;
}

/// out = A v, out preallocated.
inline void mat_vec(const ComplexMatrix& a, const StateVector& v, StateVector& out) {
  out.noalias() = a * v;
}

inline ComplexMatrix outer(const StateVector& v) { return v * v.adjoint(); }

}  // namespace nmqj
