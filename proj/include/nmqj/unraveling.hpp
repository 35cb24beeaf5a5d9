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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "nmqj/error.hpp"
#include "nmqj/linalg.hpp"
#include "nmqj/model.hpp"

namespace nmqj {

struct EngineOptions {
  /// One uniform number per step drives every component. When false each
  /// component draws its own number (same marginals, different correlations).
  bool shared_epsilon = true;
  /// Use exp(-i H_eff dt) for the non-jump branch instead of I - i H_eff dt.
  bool exact_exponential = false;
};

/// A jump moving more than this fraction of a source's weight in one step
/// is rejected as StepTooLarge.
inline constexpr double kMaxJumpFraction = 0.5;

/// One stochastic realization: M non-normalized wave functions whose squared
/// norms are the component weights.
struct TrajectoryState {
  double time = 0.0;
  std::vector<StateVector> components;

  double total_weight() const {
    double w = 0.0;
    for (const auto& psi : components) w += psi.squaredNorm();
    return w;
  }
};

struct JumpEntry {
  std::size_t source = 0;
  int label = 0;
  double probability = 0.0;
};

/// Outcome distribution of one target component for one step: jumps ordered
/// by (source, label), then the non-jump branch. All zero when weight == 0.
struct ComponentProbabilities {
  std::vector<JumpEntry> jumps;
  double non_jump = 0.0;
  double weight = 0.0;
};

struct StepProbabilities {
  std::vector<ComponentProbabilities> components;
};

/// Branch picked for one component by advance().
struct Outcome {
  enum class Kind { kJump, kNonJump, kFrozen };
  Kind kind = Kind::kFrozen;
  std::size_t jump_index = 0;  // index into ComponentProbabilities::jumps
};

/// Precomputed stepping machinery for a fixed model and time step.
///
/// For target component m the one-step unraveling is
///
///   p_m      = sum_{n,l} <psi_n|R^dag R|psi_n> dt + <psi_m|W0^dag W0|psi_m>
///   dp_mn^l  = <psi_n|R^dag R|psi_n> dt / p_m           -> sqrt(p_m) R psi_n / |R psi_n|
///   dp_mm^0  = <psi_m|W0^dag W0|psi_m> / p_m            -> sqrt(p_m) W0 psi_m / |W0 psi_m|
///
/// with W0 = I - i H_eff_m dt. Every outcome is computed from the pre-step
/// states, and each component ends the step with squared norm p_m.
class Unraveling {
 public:
  Unraveling(const GeneralizedLindbladModel& model, double dt, EngineOptions options = {})
      : num_components_(model.num_components),
        hilbert_dim_(model.hilbert_dim),
        dt_(dt),
        options_(options) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw NonPositiveStep(dt);
    require_valid(model);

    incoming_.resize(num_components_);
    for (const auto& term : model.jump_terms) {
      incoming_[term.target].push_back(
          {term.source, term.label, term.op, term.op.adjoint() * term.op});
    }
    for (auto& list : incoming_) {
      std::sort(list.begin(), list.end(), [](const Channel& a, const Channel& b) {
        return std::pair(a.source, a.label) < std::pair(b.source, b.label);
      });
    }

    const auto d = static_cast<Eigen::Index>(hilbert_dim_);
    non_jump_.reserve(num_components_);
    non_jump_gram_.reserve(num_components_);
    for (std::size_t m = 0; m < num_components_; ++m) {
      const ComplexMatrix h_eff = effective_hamiltonian(model, m);
      ComplexMatrix w0 = options_.exact_exponential
                             ? ComplexMatrix((-kI * dt * h_eff).exp())
                             : ComplexMatrix(ComplexMatrix::Identity(d, d) - kI * dt * h_eff);
      non_jump_gram_.push_back(w0.adjoint() * w0);
      non_jump_.push_back(std::move(w0));
    }
  }

  double dt() const noexcept { return dt_; }
  std::size_t num_components() const noexcept { return num_components_; }
  std::size_t hilbert_dim() const noexcept { return hilbert_dim_; }
  const EngineOptions& options() const noexcept { return options_; }
  const ComplexMatrix& non_jump_operator(std::size_t m) const { return non_jump_.at(m); }

  void check_state(const TrajectoryState& state) const {
    if (state.components.size() != num_components_) {
      throw ModelError("state has " + std::to_string(state.components.size()) +
                       " components, model has " + std::to_string(num_components_));
    }
    for (const auto& psi : state.components) {
      if (static_cast<std::size_t>(psi.size()) != hilbert_dim_) {
        throw ModelError("component wave function has dimension " + std::to_string(psi.size()) +
                         ", model has " + std::to_string(hilbert_dim_));
      }
    }
  }

  StepProbabilities probabilities(const TrajectoryState& state) const {
    check_state(state);
    StepProbabilities out;
    probabilities_into(state, out);
    return out;
  }

  /// Same as probabilities() but reuses the storage of `out`.
  void probabilities_into(const TrajectoryState& state, StepProbabilities& out) const {
    out.components.resize(num_components_);
    for (std::size_t m = 0; m < num_components_; ++m) {
      auto& cp = out.components[m];
      const auto& channels = incoming_[m];
      cp.jumps.resize(channels.size());

      double weight = 0.0;
      for (std::size_t k = 0; k < channels.size(); ++k) {
        const auto& ch = channels[k];
        const StateVector& src = state.components[ch.source];
        const double rate = quad_form(ch.decay, src).real();
        const double amount = std::max(rate, 0.0) * dt_;
        if (amount > 0.0) {
          const double source_weight = src.squaredNorm();
          if (amount > kMaxJumpFraction * source_weight) {
            const std::string fraction = detail::format_double(amount / source_weight);
            throw StepTooLarge(state.time, dt_,
                               "jump " + std::to_string(ch.source) + "->" + std::to_string(m) +
                                   " moves fraction " + fraction +
                                   " of the source weight in one step");
          }
        }
        cp.jumps[k] = {ch.source, ch.label, amount};
        weight += amount;
      }
      const double stay = quad_form(non_jump_gram_[m], state.components[m]).real();
      if (stay < 0.0) {
        throw StepTooLarge(state.time, dt_,
                           "negative non-jump probability for component " + std::to_string(m));
      }
      weight += stay;

      cp.weight = weight;
      if (weight > 0.0) {
        for (auto& j : cp.jumps) j.probability /= weight;
        cp.non_jump = stay / weight;
      } else {
        for (auto& j : cp.jumps) j.probability = 0.0;
        cp.non_jump = 0.0;
      }
    }
  }

  /// Pick the branch of component m selected by `epsilon` in [0, 1).
  /// Zero-probability branches are excluded from the partition.
  static Outcome select(const ComponentProbabilities& cp, double epsilon) {
    if (!(cp.weight > 0.0)) return {Outcome::Kind::kFrozen, 0};
    double cumulative = 0.0;
    Outcome last{Outcome::Kind::kFrozen, 0};
    for (std::size_t k = 0; k < cp.jumps.size(); ++k) {
      const double p = cp.jumps[k].probability;
      if (!(p > 0.0)) continue;
      cumulative += p;
      last = {Outcome::Kind::kJump, k};
      if (epsilon < cumulative) return last;
    }
    if (cp.non_jump > 0.0) return {Outcome::Kind::kNonJump, 0};
    // Rounding left epsilon just above the total mass: take the last live branch.
    return last;
  }

  /// Jump branch: sqrt(p_m) R psi_n / |R psi_n| from the pre-step source.
  StateVector jump(const TrajectoryState& state, const StepProbabilities& probs, std::size_t target,
                   std::size_t source, int label) const {
    check_state(state);
    const auto& channels = incoming_.at(target);
    for (std::size_t k = 0; k < channels.size(); ++k) {
      if (channels[k].source == source && channels[k].label == label) {
        StateVector out(static_cast<Eigen::Index>(hilbert_dim_));
        jump_into(state, probs.components.at(target).weight, target, k, out);
        return out;
      }
    }
    throw ModelError("no jump term (target=" + std::to_string(target) + ", source=" +
                     std::to_string(source) + ", label=" + std::to_string(label) + ")");
  }

  /// Non-jump branch: sqrt(p_m) W0 psi_m / |W0 psi_m|, or zero when p_m = 0.
  StateVector non_jump(const TrajectoryState& state, const StepProbabilities& probs,
                       std::size_t m) const {
    check_state(state);
    StateVector out(static_cast<Eigen::Index>(hilbert_dim_));
    non_jump_into(state, probs.components.at(m).weight, m, out);
    return out;
  }

  /// One synchronous step. `epsilons` holds one number (shared) or one per
  /// component; with shared_epsilon a single number is used for all.
  TrajectoryState advance(const TrajectoryState& state, std::span<const double> epsilons) const {
    check_state(state);
    TrajectoryState next = state;
    Workspace ws;
    advance_in_place(next, epsilons, ws);
    return next;
  }

  TrajectoryState advance(const TrajectoryState& state, double epsilon) const {
    return advance(state, std::span<const double>(&epsilon, 1));
  }

  /// Scratch buffers reused across steps of one trajectory.
  struct Workspace {
    StepProbabilities probs;
    std::vector<StateVector> next;
  };

  void advance_in_place(TrajectoryState& state, std::span<const double> epsilons,
                        Workspace& ws) const {
    if (epsilons.empty()) throw std::invalid_argument("advance needs at least one random number");
    if (!options_.shared_epsilon && epsilons.size() < num_components_) {
      throw std::invalid_argument("independent mode needs one random number per component");
    }
    probabilities_into(state, ws.probs);
    ws.next.resize(num_components_);
    const auto d = static_cast<Eigen::Index>(hilbert_dim_);
    for (std::size_t m = 0; m < num_components_; ++m) {
      const double eps = options_.shared_epsilon ? epsilons[0] : epsilons[m];
      const auto& cp = ws.probs.components[m];
      StateVector& out = ws.next[m];
      out.resize(d);
      const Outcome outcome = select(cp, eps);
      switch (outcome.kind) {
        case Outcome::Kind::kFrozen:
          out.setZero();
          break;
        case Outcome::Kind::kJump:
          jump_into(state, cp.weight, m, outcome.jump_index, out);
          break;
        case Outcome::Kind::kNonJump:
          non_jump_into(state, cp.weight, m, out);
          break;
      }
    }
    std::swap(state.components, ws.next);
    state.time += dt_;
  }

  /// Deterministic sum over every branch weighted by its probability:
  ///   rho_m' = sum_{n,l} dp_mn^l |psi_mn^l><psi_mn^l| + dp_mm^0 |psi_mm^0><psi_mm^0|.
  DensityComponents enumerate(const TrajectoryState& state) const {
    const StepProbabilities probs = probabilities(state);
    const auto d = static_cast<Eigen::Index>(hilbert_dim_);
    DensityComponents rho(num_components_, ComplexMatrix::Zero(d, d));
    StateVector branch(d);
    for (std::size_t m = 0; m < num_components_; ++m) {
      const auto& cp = probs.components[m];
      if (!(cp.weight > 0.0)) continue;
      for (std::size_t k = 0; k < cp.jumps.size(); ++k) {
        const double p = cp.jumps[k].probability;
        if (!(p > 0.0)) continue;
        jump_into(state, cp.weight, m, k, branch);
        rho[m] += p * outer(branch);
      }
      if (cp.non_jump > 0.0) {
        non_jump_into(state, cp.weight, m, branch);
        rho[m] += cp.non_jump * outer(branch);
      }
    }
    return rho;
  }

 private:
  struct Channel {
    std::size_t source;
    int label;
    ComplexMatrix op;
    ComplexMatrix decay;  // R^dag R
  };

  void jump_into(const TrajectoryState& state, double weight, std::size_t m, std::size_t k,
                 StateVector& out) const {
    const auto& ch = incoming_[m][k];
    mat_vec(ch.op, state.components[ch.source], out);
    const double norm = out.norm();
    if (!(norm > 0.0)) {
      throw ZeroNormJump("selected jump " + std::to_string(ch.source) + "->" + std::to_string(m) +
                         " has zero amplitude at t=" + std::to_string(state.time));
    }
    out *= std::sqrt(weight) / norm;
  }

  void non_jump_into(const TrajectoryState& state, double weight, std::size_t m,
                     StateVector& out) const {
    mat_vec(non_jump_[m], state.components[m], out);
    const double norm = out.norm();
    if (!(weight > 0.0) || !(norm > 0.0)) {
      out.setZero();
      return;
    }
    out *= std::sqrt(weight) / norm;
  }

  std::size_t num_components_;
  std::size_t hilbert_dim_;
  double dt_;
  EngineOptions options_;
  std::vector<std::vector<Channel>> incoming_;
  std::vector<ComplexMatrix> non_jump_;
  std::vector<ComplexMatrix> non_jump_gram_;
};

inline StepProbabilities step_probabilities(const TrajectoryState& state,
                                            const GeneralizedLindbladModel& model, double dt,
                                            EngineOptions options = {}) {
  return Unraveling(model, dt, options).probabilities(state);
}

inline StateVector apply_jump(const TrajectoryState& state, std::size_t target, std::size_t source,
                              int label, const GeneralizedLindbladModel& model, double dt,
                              EngineOptions options = {}) {
  const Unraveling engine(model, dt, options);
  return engine.jump(state, engine.probabilities(state), target, source, label);
}

inline StateVector apply_non_jump(const TrajectoryState& state, std::size_t m,
                                  const GeneralizedLindbladModel& model, double dt,
                                  EngineOptions options = {}) {
  const Unraveling engine(model, dt, options);
  return engine.non_jump(state, engine.probabilities(state), m);
}

inline TrajectoryState advance(const TrajectoryState& state, const GeneralizedLindbladModel& model,
                               double dt, double epsilon) {
  return Unraveling(model, dt).advance(state, epsilon);
}

inline DensityComponents enumerate_single_step(const TrajectoryState& state,
                                               const GeneralizedLindbladModel& model, double dt,
                                               EngineOptions options = {}) {
  return Unraveling(model, dt, options).enumerate(state);
}

}  // namespace nmqj
