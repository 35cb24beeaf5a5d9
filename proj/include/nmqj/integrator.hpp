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
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nmqj/error.hpp"
#include "nmqj/linalg.hpp"
#include "nmqj/model.hpp"
#include "nmqj/observables.hpp"
#include "nmqj/statistics.hpp"
#include "nmqj/trajectory.hpp"
#include "nmqj/unraveling.hpp"

namespace nmqj {

inline constexpr double kDensityHermitianTolerance = 1e-10;
inline constexpr double kDensityPositivityTolerance = -1e-10;
/// Allowed drift of the summed trace along an integration.
inline constexpr double kIntegratorTraceTolerance = 1e-6;

/// rho_m = |psi_m><psi_m| for every component.
inline DensityComponents density_from_state(const TrajectoryState& state) {
  DensityComponents rho;
  rho.reserve(state.components.size());
  for (const auto& psi : state.components) rho.push_back(outer(psi));
  return rho;
}

inline double total_trace(const DensityComponents& rho) {
  double t = 0.0;
  for (const auto& r : rho) t += r.trace().real();
  return t;
}

/// rho_S = sum_m rho_m
inline ComplexMatrix reduce_density(const DensityComponents& rho) {
  if (rho.empty()) throw std::invalid_argument("no components to reduce");
  ComplexMatrix sum = rho.front();
  for (std::size_t m = 1; m < rho.size(); ++m) sum += rho[m];
  return sum;
}

/// Right-hand side of the coupled component master equation, per component.
/// A jump term (target m, source n, R) contributes R rho_n R^dag to component
/// m and -1/2 {R^dag R, rho_n} to component n.
inline DensityComponents master_rhs(const GeneralizedLindbladModel& model,
                                    const DensityComponents& rho) {
  const auto d = static_cast<Eigen::Index>(model.hilbert_dim);
  if (rho.size() != model.num_components) {
    throw ModelError("expected " + std::to_string(model.num_components) + " components, got " +
                     std::to_string(rho.size()));
  }
  for (const auto& r : rho) {
    if (r.rows() != d || r.cols() != d) throw ModelError("density component dimension mismatch");
  }

  DensityComponents out(model.num_components);
  for (std::size_t m = 0; m < model.num_components; ++m) {
    const auto& h = model.hamiltonians.at(m);
    out[m] = -kI * (h * rho[m] - rho[m] * h);
  }
  for (const auto& term : model.jump_terms) {
    const ComplexMatrix& r = term.op;
    const ComplexMatrix& src = rho[term.source];
    const ComplexMatrix decay = r.adjoint() * r;
    out[term.target] += r * src * r.adjoint();
    out[term.source] -= 0.5 * (decay * src + src * decay);
  }
  return out;
}

namespace detail {

inline DensityComponents axpy(const DensityComponents& x, double a, const DensityComponents& k) {
  DensityComponents out = x;
  for (std::size_t m = 0; m < out.size(); ++m) out[m] += a * k[m];
  return out;
}

inline void check_density(const DensityComponents& rho, double time, double reference_trace) {
  for (std::size_t m = 0; m < rho.size(); ++m) {
    const double defect = hermiticity_defect(rho[m]);
    if (defect > kDensityHermitianTolerance) {
      throw IntegrationError(time, "component " + std::to_string(m) + " not Hermitian (" +
                                       format_double(defect) + ")");
    }
    const ComplexMatrix herm = 0.5 * (rho[m] + rho[m].adjoint());
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < kDensityPositivityTolerance) {
      throw IntegrationError(time, "component " + std::to_string(m) +
                                       " not positive (min eigenvalue " + format_double(min_eig) +
                                       ")");
    }
  }
  const double drift = std::abs(total_trace(rho) - reference_trace);
  if (drift > kIntegratorTraceTolerance) {
    throw IntegrationError(time, "summed trace drifted by " + format_double(drift));
  }
}

}  // namespace detail

struct DensitySample {
  double time = 0.0;
  DensityComponents components;
};

/// Classic fixed-step RK4 of master_rhs, sampled on the same grid as the
/// trajectories (steps 0, stride, 2*stride, ...). Every sample is checked for
/// Hermiticity, positivity and conservation of the summed trace.
inline std::vector<DensitySample> rk4_integrate(const GeneralizedLindbladModel& model,
                                                const DensityComponents& initial, double dt,
                                                double t_max, std::size_t sample_stride = 1) {
  require_valid(model);
  const StepPlan plan = StepPlan::make(dt, t_max, sample_stride);
  const double reference_trace = total_trace(initial);

  std::vector<DensitySample> samples;
  DensityComponents rho = initial;
  detail::check_density(rho, 0.0, reference_trace);
  samples.push_back({0.0, rho});
  for (std::size_t step = 1; step <= plan.steps; ++step) {
    const DensityComponents k1 = master_rhs(model, rho);
    const DensityComponents k2 = master_rhs(model, detail::axpy(rho, 0.5 * dt, k1));
    const DensityComponents k3 = master_rhs(model, detail::axpy(rho, 0.5 * dt, k2));
    const DensityComponents k4 = master_rhs(model, detail::axpy(rho, dt, k3));
    for (std::size_t m = 0; m < rho.size(); ++m) {
      rho[m] += (dt / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
    }
    if (step % plan.stride == 0) {
      const double t = static_cast<double>(step) * dt;
      detail::check_density(rho, t, reference_trace);
      samples.push_back({t, rho});
    }
  }
  return samples;
}

/// Observable series Tr(A sum_m rho_m) of an integrated trajectory.
inline TimeSeries density_series(const std::vector<DensitySample>& samples,
                                 const std::vector<Observable>& observables) {
  TimeSeries series;
  for (const auto& a : observables) series.names.push_back(a.name);
  series.values.assign(observables.size(), {});
  for (const auto& s : samples) {
    series.times.push_back(s.time);
    for (std::size_t k = 0; k < observables.size(); ++k) {
      series.values[k].push_back(expectation_density(s.components, observables[k]));
    }
  }
  return series;
}

/// Two-band model started with a|e> + b|g> in component 0 and component 1 empty.
///
/// The populations x = rho_0,ee and y = rho_1,gg obey
///   x' = g1 y - g2 x,  y' = g2 x - g1 y,  x(0) = |a|^2, y(0) = 0,
/// so x(t) = |a|^2 (g1 + g2 exp(-(g1+g2) t)) / (g1 + g2). The coherence of
/// component 0 decays as a b* exp(-g2 t / 2); rho_0,gg = |b|^2 is constant and
/// every other entry of component 1 stays zero.
inline DensityComponents closed_form_two_band(double gamma1, double gamma2, Complex a, Complex b,
                                              double t) {
  if (std::abs(std::norm(a) + std::norm(b) - 1.0) > kInitialNormTolerance) {
    throw std::invalid_argument("closed form needs |a|^2 + |b|^2 = 1");
  }
  if (!(t >= 0.0)) throw std::invalid_argument("closed form needs t >= 0");
  const double pop_e = std::norm(a);
  const double total = gamma1 + gamma2;
  const double x = total > 0.0 ? pop_e * (gamma1 + gamma2 * std::exp(-total * t)) / total : pop_e;
  const Complex coherence = a * std::conj(b) * std::exp(-0.5 * gamma2 * t);

  DensityComponents rho(2, ComplexMatrix::Zero(2, 2));
  rho[0](kExcited, kExcited) = x;
  rho[0](kGround, kGround) = std::norm(b);
  rho[0](kExcited, kGround) = coherence;
  rho[0](kGround, kExcited) = std::conj(coherence);
  rho[1](kGround, kGround) = pop_e - x;
  return rho;
}

}  // namespace nmqj
