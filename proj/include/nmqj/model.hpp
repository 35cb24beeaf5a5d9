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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nmqj/error.hpp"
#include "nmqj/linalg.hpp"

namespace nmqj {

// Two-level basis: |e> is index 0, |g> is index 1.
inline constexpr Eigen::Index kExcited = 0;
inline constexpr Eigen::Index kGround = 1;

/// sigma+ = |e><g|
inline ComplexMatrix sigma_plus() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(kExcited, kGround) = 1.0;
  return s;
}

/// sigma- = |g><e|
inline ComplexMatrix sigma_minus() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(kGround, kExcited) = 1.0;
  return s;
}

/// sigma_z = diag(1, -1) = |e><e| - |g><g|
inline ComplexMatrix sigma_z() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(kExcited, kExcited) = 1.0;
  s(kGround, kGround) = -1.0;
  return s;
}

/// Operator R moving amplitude from component `source` into `target`.
/// `label` distinguishes several operators acting on the same pair.
struct JumpTerm {
  std::size_t target = 0;
  std::size_t source = 0;
  int label = 0;
  ComplexMatrix op;
};

/// Coupled component master equation
///
///   d/dt rho_m = -i[H_m, rho_m]
///              + sum_{n,l} ( R_mn^l rho_n R_mn^l^dag - 1/2 {R_nm^l^dag R_nm^l, rho_m} ).
///
/// Every jump term (target m, source n) both feeds component m from rho_n and
/// drains component n through its anticommutator, so the generator conserves
/// the summed trace by construction.
struct GeneralizedLindbladModel {
  std::size_t num_components = 1;
  std::size_t hilbert_dim = 1;
  std::vector<ComplexMatrix> hamiltonians;
  std::vector<JumpTerm> jump_terms;
};

inline constexpr double kHermitianTolerance = 1e-10;

struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const noexcept { return issues.empty(); }

  std::string to_string() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& issue : issues) os << issue << '\n';
    return os.str();
  }
};

namespace detail {

inline std::string format_double(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

inline bool has_dim(const ComplexMatrix& a, std::size_t d) {
  return static_cast<std::size_t>(a.rows()) == d && static_cast<std::size_t>(a.cols()) == d;
}

// sum over terms with source m of R^dag R
inline ComplexMatrix decay_operator(const GeneralizedLindbladModel& model, std::size_t m) {
  const auto d = static_cast<Eigen::Index>(model.hilbert_dim);
  ComplexMatrix gamma = ComplexMatrix::Zero(d, d);
  for (const auto& term : model.jump_terms) {
    if (term.source == m) gamma.noalias() += term.op.adjoint() * term.op;
  }
  return gamma;
}

}  // namespace detail

/// Effective non-Hermitian Hamiltonian of component m,
///   H_eff_m = H_m - (i/2) sum_{n,l} R_nm^l^dag R_nm^l,
/// summing over the terms whose source is m (the terms draining component m).
inline ComplexMatrix effective_hamiltonian(const GeneralizedLindbladModel& model, std::size_t m) {
  if (m >= model.num_components) {
    throw std::out_of_range("component index " + std::to_string(m) + " out of range (M=" +
                            std::to_string(model.num_components) + ")");
  }
  return model.hamiltonians.at(m) - 0.5 * kI * detail::decay_operator(model, m);
}

/// Collects every structural violation instead of stopping at the first.
inline ValidationReport validate(const GeneralizedLindbladModel& model) {
  ValidationReport report;
  auto& issues = report.issues;
  const std::size_t big_m = model.num_components;
  const std::size_t d = model.hilbert_dim;

  if (big_m < 1) issues.emplace_back("model must have at least one component");
  if (d < 1) issues.emplace_back("hilbert dimension must be positive");
  if (model.hamiltonians.size() != big_m) {
    issues.push_back("expected " + std::to_string(big_m) + " hamiltonians, got " +
                     std::to_string(model.hamiltonians.size()));
  }

  bool structurally_sound = issues.empty();
  for (std::size_t m = 0; m < model.hamiltonians.size(); ++m) {
    const auto& h = model.hamiltonians[m];
    const std::string tag = "hamiltonian " + std::to_string(m);
    if (!detail::has_dim(h, d)) {
      issues.push_back(tag + " has dimension " + std::to_string(h.rows()) + "x" +
                       std::to_string(h.cols()) + ", expected " + std::to_string(d) + "x" +
                       std::to_string(d));
      structurally_sound = false;
      continue;
    }
    if (!all_finite(h)) {
      issues.push_back(tag + " has non-finite entries");
      structurally_sound = false;
      continue;
    }
    const double defect = hermiticity_defect(h);
    if (defect > kHermitianTolerance) {
      issues.push_back(tag + " not Hermitian (max |H - H^dag| = " +
                       detail::format_double(defect) + ")");
    }
  }

  std::map<std::tuple<std::size_t, std::size_t, int>, std::size_t> seen;
  for (std::size_t k = 0; k < model.jump_terms.size(); ++k) {
    const auto& term = model.jump_terms[k];
    const std::string tag = "jump term " + std::to_string(k);
    if (term.target >= big_m || term.source >= big_m) {
      issues.push_back(tag + ": component index out of range (target=" +
                       std::to_string(term.target) + ", source=" + std::to_string(term.source) +
                       ", M=" + std::to_string(big_m) + ")");
      structurally_sound = false;
    }
    if (!detail::has_dim(term.op, d)) {
      issues.push_back(tag + ": operator dimension mismatch (" + std::to_string(term.op.rows()) +
                       "x" + std::to_string(term.op.cols()) + ", expected " +
                       std::to_string(d) + "x" + std::to_string(d) + ")");
      structurally_sound = false;
    } else if (!all_finite(term.op)) {
      issues.push_back(tag + ": operator has non-finite entries");
      structurally_sound = false;
    }
    const auto key = std::make_tuple(term.target, term.source, term.label);
    if (auto [it, inserted] = seen.emplace(key, k); !inserted) {
      issues.push_back(tag + " duplicates (target, source, label) of jump term " +
                       std::to_string(it->second));
    }
  }

  // Trace preservation: the anti-Hermitian part of each effective Hamiltonian
  // must equal -(i/2) times the summed outflow R^dag R of that component.
  if (structurally_sound && issues.empty()) {
    for (std::size_t n = 0; n < big_m; ++n) {
      const ComplexMatrix h_eff = effective_hamiltonian(model, n);
      ComplexMatrix outflow = ComplexMatrix::Zero(h_eff.rows(), h_eff.cols());
      for (const auto& term : model.jump_terms) {
        if (term.source == n) outflow += term.op.adjoint() * term.op;
      }
      const double defect = max_abs(h_eff - h_eff.adjoint() + kI * outflow);
      if (defect > kHermitianTolerance) {
        issues.push_back("generator not trace-preserving for component " + std::to_string(n) +
                         " (defect " + detail::format_double(defect) + ")");
      }
    }
  }
  return report;
}

inline void require_valid(const GeneralizedLindbladModel& model) {
  const auto report = validate(model);
  if (!report.ok()) throw ModelError("invalid model:\n" + report.to_string());
}

/// Two-band environment model with components (lower band, upper band):
///   d/dt rho_0 = g1 s+ rho_1 s- - g2/2 {s+ s-, rho_0}
///   d/dt rho_1 = g2 s- rho_0 s+ - g1/2 {s- s+, rho_1}
/// H_0 = H_1 = 0, R_01 = sqrt(g1) s+, R_10 = sqrt(g2) s-.
inline GeneralizedLindbladModel build_two_band(double gamma1, double gamma2) {
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0) || !std::isfinite(gamma1) || !std::isfinite(gamma2)) {
    throw std::invalid_argument("two-band rates must be finite and nonnegative");
  }
  GeneralizedLindbladModel model;
  model.num_components = 2;
  model.hilbert_dim = 2;
  model.hamiltonians = {ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  model.jump_terms.push_back({0, 1, 0, std::sqrt(gamma1) * sigma_plus()});
  model.jump_terms.push_back({1, 0, 0, std::sqrt(gamma2) * sigma_minus()});
  return model;
}

/// Central spin in a spin bath, one component per bath projection label m:
///   d/dt rho_m = g_{m+1} s+ rho_{m+1} s- + f_{m-1} s- rho_{m-1} s+
///              - f_m/2 {s+ s-, rho_m} - g_m/2 {s- s+, rho_m}.
///
/// `f[i]`, `g[i]` are the rates of the component labelled `m_values[i]`. A
/// component with no neighbour at m+1 must have f = 0, and one with no
/// neighbour at m-1 must have g = 0; otherwise the equation leaks trace.
inline GeneralizedLindbladModel build_spin_bath(const std::vector<double>& f,
                                                const std::vector<double>& g,
                                                const std::vector<int>& m_values) {
  const std::size_t count = m_values.size();
  if (count == 0) throw std::invalid_argument("spin bath needs at least one component");
  if (f.size() != count || g.size() != count) {
    throw std::invalid_argument("spin bath rate lists must match the number of m values");
  }
  std::map<int, std::size_t> index_of;
  for (std::size_t i = 0; i < count; ++i) {
    if (!index_of.emplace(m_values[i], i).second) {
      throw std::invalid_argument("duplicate spin bath label m=" + std::to_string(m_values[i]));
    }
    if (!(f[i] >= 0.0) || !(g[i] >= 0.0) || !std::isfinite(f[i]) || !std::isfinite(g[i])) {
      throw std::invalid_argument("spin bath rates must be finite and nonnegative");
    }
  }

  GeneralizedLindbladModel model;
  model.num_components = count;
  model.hilbert_dim = 2;
  model.hamiltonians.assign(count, ComplexMatrix::Zero(2, 2));
  for (std::size_t i = 0; i < count; ++i) {
    const int m = m_values[i];
    const auto up = index_of.find(m + 1);
    const auto down = index_of.find(m - 1);
    if (up == index_of.end() && f[i] != 0.0) {
      throw std::invalid_argument("boundary rate f at m=" + std::to_string(m) +
                                  " must be zero (no component at m+1)");
    }
    if (down == index_of.end() && g[i] != 0.0) {
      throw std::invalid_argument("boundary rate g at m=" + std::to_string(m) +
                                  " must be zero (no component at m-1)");
    }
    if (up != index_of.end()) {
      model.jump_terms.push_back({up->second, i, 0, std::sqrt(f[i]) * sigma_minus()});
    }
    if (down != index_of.end()) {
      model.jump_terms.push_back({down->second, i, 0, std::sqrt(g[i]) * sigma_plus()});
    }
  }
  return model;
}

/// N=2 bath: labels (1, 0, -1), every interior rate equal to `rate`.
inline GeneralizedLindbladModel build_spin_bath_n2(double rate = 1.0) {
  return build_spin_bath({0.0, rate, rate}, {rate, rate, 0.0}, {1, 0, -1});
}

/// gamma_i = 2 pi lambda^2 N_i / delta_eps
inline double gamma_from_microscopic(double coupling, long levels, double band_width) {
  if (levels < 1) throw std::invalid_argument("level count must be at least 1");
  if (!(band_width > 0.0)) throw std::invalid_argument("band width must be positive");
  return 2.0 * std::numbers::pi * coupling * coupling * static_cast<double>(levels) / band_width;
}

/// Number of generalized jump superoperators, M(J - 1) + 1, for M components
/// with J operators each (the non-jump operator included).
inline std::size_t jump_mode_count(std::size_t components, std::size_t operators_per_component) {
  if (components < 1 || operators_per_component < 1) {
    throw std::invalid_argument("jump_mode_count needs M >= 1 and J >= 1");
  }
  return components * (operators_per_component - 1) + 1;
}

/// J for a model: the largest number of jump operators feeding any single
/// component, plus the non-jump operator.
inline std::size_t operators_per_component(const GeneralizedLindbladModel& model) {
  std::vector<std::size_t> incoming(model.num_components, 0);
  for (const auto& term : model.jump_terms) {
    if (term.target < incoming.size()) ++incoming[term.target];
  }
  const auto it = std::max_element(incoming.begin(), incoming.end());
  return (it == incoming.end() ? 0 : *it) + 1;
}

inline std::size_t jump_mode_count(const GeneralizedLindbladModel& model) {
  return jump_mode_count(model.num_components, operators_per_component(model));
}

/// Entrywise equality of two models within `tol`, terms compared in order.
inline bool models_equal(const GeneralizedLindbladModel& a, const GeneralizedLindbladModel& b,
                         double tol = 0.0) {
  if (a.num_components != b.num_components || a.hilbert_dim != b.hilbert_dim) return false;
  if (a.hamiltonians.size() != b.hamiltonians.size()) return false;
  if (a.jump_terms.size() != b.jump_terms.size()) return false;
  for (std::size_t m = 0; m < a.hamiltonians.size(); ++m) {
    if (a.hamiltonians[m].rows() != b.hamiltonians[m].rows() ||
        a.hamiltonians[m].cols() != b.hamiltonians[m].cols() ||
        max_abs(a.hamiltonians[m] - b.hamiltonians[m]) > tol) {
      return false;
    }
  }
  for (std::size_t k = 0; k < a.jump_terms.size(); ++k) {
    const auto& x = a.jump_terms[k];
    const auto& y = b.jump_terms[k];
    if (x.target != y.target || x.source != y.source || x.label != y.label) return false;
    if (x.op.rows() != y.op.rows() || x.op.cols() != y.op.cols() || max_abs(x.op - y.op) > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace nmqj
