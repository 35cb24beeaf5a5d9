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
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmqj/error.hpp"
#include "nmqj/linalg.hpp"
#include "nmqj/model.hpp"
#include "nmqj/unraveling.hpp"

namespace nmqj {

inline constexpr double kImaginaryResidueTolerance = 1e-10;

/// Hermitian operator A, optionally restricted to a single component.
/// Without a restriction the value is sum_m <psi_m|A|psi_m> (or Tr(A sum_m rho_m)).
struct Observable {
  std::string name;
  ComplexMatrix op;
  std::optional<std::size_t> component;
};

namespace observables {

inline void require_two_level(std::size_t d, const std::string& name) {
  if (d < 2) throw std::invalid_argument(name + " needs hilbert dimension >= 2");
}

inline Observable excited_population(std::size_t d) {
  require_two_level(d, "excited_population");
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  a(kExcited, kExcited) = 1.0;
  return {"excited_population", a, std::nullopt};
}

inline Observable ground_population(std::size_t d) {
  require_two_level(d, "ground_population");
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  a(kGround, kGround) = 1.0;
  return {"ground_population", a, std::nullopt};
}

/// Re rho_eg = Tr(rho (|g><e| + |e><g|)/2)
inline Observable coherence_re(std::size_t d) {
  require_two_level(d, "coherence_re");
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  a(kGround, kExcited) = 0.5;
  a(kExcited, kGround) = 0.5;
  return {"coherence_re", a, std::nullopt};
}

/// Im rho_eg = Tr(rho (|g><e| - |e><g|)/(2i))
inline Observable coherence_im(std::size_t d) {
  require_two_level(d, "coherence_im");
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  a(kGround, kExcited) = Complex(0.0, -0.5);
  a(kExcited, kGround) = Complex(0.0, 0.5);
  return {"coherence_im", a, std::nullopt};
}

inline Observable sigma_z(std::size_t d) {
  if (d != 2) throw std::invalid_argument("sigma_z needs hilbert dimension 2");
  return {"sigma_z", nmqj::sigma_z(), std::nullopt};
}

/// Summed squared norm of all components.
inline Observable total_weight(std::size_t d) {
  return {"total_weight", ComplexMatrix::Identity(d, d), std::nullopt};
}

/// Tr rho_m, the weight of a single component.
inline Observable component_weight(std::size_t m, std::size_t d) {
  return {"component_weight_" + std::to_string(m), ComplexMatrix::Identity(d, d), m};
}

/// Preset by name. `component_weight` presets go through component_weight().
inline Observable preset(const std::string& name, std::size_t d) {
  if (name == "excited_population") return excited_population(d);
  if (name == "ground_population") return ground_population(d);
  if (name == "coherence_re") return coherence_re(d);
  if (name == "coherence_im") return coherence_im(d);
  if (name == "sigma_z") return sigma_z(d);
  if (name == "total_weight") return total_weight(d);
  throw std::invalid_argument("unknown observable preset '" + name + "'");
}

}  // namespace observables

/// Throws std::invalid_argument unless `a` is a finite Hermitian d x d operator
/// with a component restriction below `num_components`.
inline void check_observable(const Observable& a, std::size_t d, std::size_t num_components) {
  if (static_cast<std::size_t>(a.op.rows()) != d || static_cast<std::size_t>(a.op.cols()) != d) {
    throw std::invalid_argument("observable '" + a.name + "' has wrong dimension");
  }
  if (!all_finite(a.op)) throw std::invalid_argument("observable '" + a.name + "' is not finite");
  if (hermiticity_defect(a.op) > kHermitianTolerance) {
    throw std::invalid_argument("observable '" + a.name + "' is not Hermitian");
  }
  if (a.component && *a.component >= num_components) {
    throw std::invalid_argument("observable '" + a.name + "' refers to a missing component");
  }
}

namespace detail {

inline double checked_real(Complex z, const std::string& name) {
  if (std::abs(z.imag()) > kImaginaryResidueTolerance) {
    throw ImaginaryResidue("observable '" + name + "' has imaginary residue " +
                           std::to_string(z.imag()));
  }
  return z.real();
}

inline bool selects(const Observable& a, std::size_t m) {
  return !a.component.has_value() || *a.component == m;
}

}  // namespace detail

/// sum_m <psi_m|A|psi_m> over non-normalized component states.
inline double expectation_wavefunction(const TrajectoryState& state, const Observable& a) {
  Complex acc{0.0, 0.0};
  for (std::size_t m = 0; m < state.components.size(); ++m) {
    if (detail::selects(a, m)) acc += quad_form(a.op, state.components[m]);
  }
  return detail::checked_real(acc, a.name);
}

inline double expectation_wavefunction(const TrajectoryState& state, const ComplexMatrix& a) {
  return expectation_wavefunction(state, Observable{"A", a, std::nullopt});
}

/// Tr(A sum_m rho_m)
inline double expectation_density(const DensityComponents& rho, const Observable& a) {
  Complex acc{0.0, 0.0};
  for (std::size_t m = 0; m < rho.size(); ++m) {
    if (detail::selects(a, m)) acc += (a.op * rho[m]).trace();
  }
  return detail::checked_real(acc, a.name);
}

inline double expectation_density(const DensityComponents& rho, const ComplexMatrix& a) {
  return expectation_density(rho, Observable{"A", a, std::nullopt});
}

}  // namespace nmqj
