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
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "nmqj/error.hpp"
#include "nmqj/model.hpp"
#include "nmqj/observables.hpp"
#include "nmqj/statistics.hpp"
#include "nmqj/unraveling.hpp"

namespace nmqj {

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// SplitMix64 output function.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of trajectory `index` under `master_seed`:
///   splitmix64(master_seed XOR splitmix64(index)).
/// Depends only on the pair, so any scheduling of trajectories reproduces it.
inline constexpr std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return splitmix64(master_seed ^ splitmix64(index));
}

/// Uniform doubles in [0, 1) from the top 53 bits of a 64-bit Mersenne
/// Twister. Spelled out so streams match across standard libraries.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

inline constexpr double kInitialNormTolerance = 1e-9;

/// Time grid shared by trajectories and the reference integrator.
struct StepPlan {
  std::size_t steps = 0;
  std::size_t stride = 1;

  static StepPlan make(double dt, double t_max, std::size_t stride) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw NonPositiveStep(dt);
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
      throw std::invalid_argument("t_max must be positive");
    }
    if (stride < 1) throw std::invalid_argument("sample_stride must be at least 1");
    const double ratio = t_max / dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps < 1) throw std::invalid_argument("t_max is shorter than one step");
    return {steps, stride};
  }

  /// Sample at steps 0, stride, 2*stride, ... <= steps.
  std::vector<double> times(double dt) const {
    std::vector<double> out;
    for (std::size_t s = 0; s <= steps; s += stride) out.push_back(static_cast<double>(s) * dt);
    return out;
  }
};

struct TrajectorySettings {
  double dt = 1e-3;
  double t_max = 1.0;
  std::size_t sample_stride = 1;
  EngineOptions options{};
};

inline void check_initial_state(const TrajectoryState& initial) {
  const double w = initial.total_weight();
  if (!(std::abs(w - 1.0) <= kInitialNormTolerance)) {
    throw std::invalid_argument("initial total squared norm must be 1, got " + std::to_string(w));
  }
}

/// Runs trajectories with a prebuilt engine. One instance may be shared by
/// several threads; run() keeps all mutable state on the caller's stack.
class TrajectoryRunner {
 public:
  TrajectoryRunner(const GeneralizedLindbladModel& model, std::vector<Observable> observables,
                   const TrajectorySettings& settings)
      : engine_(model, settings.dt, settings.options),
        observables_(std::move(observables)),
        plan_(StepPlan::make(settings.dt, settings.t_max, settings.sample_stride)),
        times_(plan_.times(settings.dt)) {
    for (const auto& a : observables_) {
      check_observable(a, model.hilbert_dim, model.num_components);
    }
  }

  const std::vector<double>& times() const noexcept { return times_; }
  const Unraveling& engine() const noexcept { return engine_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& a : observables_) out.push_back(a.name);
    return out;
  }

  /// Records sum_m <psi_m|A|psi_m> every `sample_stride` steps.
  TimeSeries run(const TrajectoryState& initial, std::uint64_t seed) const {
    engine_.check_state(initial);
    check_initial_state(initial);

    TimeSeries series;
    series.times = times_;
    series.names = names();
    series.values.assign(observables_.size(), {});
    for (auto& column : series.values) column.reserve(times_.size());

    UniformSource uniform(seed);
    Unraveling::Workspace ws;
    TrajectoryState state = initial;
    std::vector<double> eps(engine_.options().shared_epsilon ? 1 : engine_.num_components());

    auto record = [&] {
      for (std::size_t k = 0; k < observables_.size(); ++k) {
        series.values[k].push_back(expectation_wavefunction(state, observables_[k]));
      }
    };

    record();
    for (std::size_t step = 1; step <= plan_.steps; ++step) {
      for (auto& e : eps) e = uniform();
      engine_.advance_in_place(state, eps, ws);
      // Keep the clock on the grid instead of accumulating rounding.
      state.time = static_cast<double>(step) * engine_.dt();
      if (step % plan_.stride == 0) record();
    }
    return series;
  }

 private:
  Unraveling engine_;
  std::vector<Observable> observables_;
  StepPlan plan_;
  std::vector<double> times_;
};

inline TimeSeries run_trajectory(const GeneralizedLindbladModel& model,
                                 const TrajectoryState& initial, double dt, double t_max,
                                 std::uint64_t seed, const std::vector<Observable>& observables,
                                 std::size_t sample_stride = 1, EngineOptions options = {}) {
  const TrajectoryRunner runner(model, observables, {dt, t_max, sample_stride, options});
  return runner.run(initial, seed);
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct EnsembleResult {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> std_error;
  std::size_t n_traj = 0;
  std::uint64_t master_seed = 0;
};

struct EnsembleSettings {
  TrajectorySettings trajectory{};
  std::size_t n_traj = 1;
  std::uint64_t master_seed = 0;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
};

/// Trajectories per accumulation block. Blocks are the unit of work and are
/// merged in index order, which makes the result independent of worker count.
inline constexpr std::size_t kEnsembleBlockSize = 32;

inline EnsembleResult run_ensemble(const GeneralizedLindbladModel& model,
                                   const TrajectoryState& initial,
                                   const std::vector<Observable>& observables,
                                   const EnsembleSettings& settings) {
  if (settings.n_traj < 1) throw std::invalid_argument("n_traj must be at least 1");
  const TrajectoryRunner runner(model, observables, settings.trajectory);
  runner.engine().check_state(initial);
  check_initial_state(initial);

  const std::size_t n_blocks = (settings.n_traj + kEnsembleBlockSize - 1) / kEnsembleBlockSize;
  unsigned workers = settings.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_blocks));

  std::vector<EnsembleAccumulator> blocks(n_blocks);
  std::atomic<std::size_t> next_block{0};
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  std::size_t failed_index = settings.n_traj;
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t b = next_block.fetch_add(1);
      if (b >= n_blocks || failed.load()) return;
      const std::size_t first = b * kEnsembleBlockSize;
      const std::size_t last = std::min(first + kEnsembleBlockSize, settings.n_traj);
      EnsembleAccumulator acc(runner.times(), runner.names());
      for (std::size_t j = first; j < last; ++j) {
        try {
          acc.accumulate(runner.run(initial, child_seed(settings.master_seed, j)));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (j < failed_index) {
            failed_index = j;
            failure = std::current_exception();
          }
          failed.store(true);
          return;
        }
      }
      blocks[b] = std::move(acc);
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (...) {
      std::throw_with_nested(TrajectoryFailure(failed_index));
    }
  }

  EnsembleAccumulator total(runner.times(), runner.names());
  for (const auto& block : blocks) total.merge(block);
  const EnsembleSummary summary = total.finalize();

  EnsembleResult result;
  result.times = summary.times;
  result.names = summary.names;
  result.mean = summary.mean;
  result.std_error = summary.std_error;
  result.n_traj = summary.count;
  result.master_seed = settings.master_seed;
  return result;
}

/// Innermost message of a nested exception chain, joined with ": ".
inline std::string describe_exception(const std::exception& e) {
  std::string out = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    out += ": " + describe_exception(inner);
  } catch (...) {
    out += ": unknown error";
  }
  return out;
}

}  // namespace nmqj
