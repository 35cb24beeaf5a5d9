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
#include <string>
#include <vector>

#include "nmqj/error.hpp"

namespace nmqj {

/// Observable values on a shared time grid. values[k][i] is observable k at times[i].
struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  std::size_t size() const noexcept { return times.size(); }

  /// Throws GridMismatch unless the grid is strictly increasing and every
  /// column has one value per time.
  void check() const {
    if (names.size() != values.size()) throw GridMismatch("observable names/values count differ");
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) throw GridMismatch("time grid is not strictly increasing");
    }
    for (const auto& column : values) {
      if (column.size() != times.size()) throw GridMismatch("series length differs from grid");
    }
  }
};

/// Per time point and observable mean with its standard error.
struct EnsembleSummary {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> std_error;
  std::size_t count = 0;
  /// Set when count < 2: the standard error is undefined and reported as 0.
  bool std_error_undefined = true;
};

/// Streaming per-cell mean and sum of squared deviations (Welford), mergeable
/// with the pairwise update of Chan et al. Merging in a fixed order gives
/// bit-identical results regardless of where the partial sums were computed.
class EnsembleAccumulator {
 public:
  EnsembleAccumulator() = default;

  EnsembleAccumulator(std::vector<double> times, std::vector<std::string> names)
      : times_(std::move(times)), names_(std::move(names)) {
    allocate();
  }

  std::size_t count() const noexcept { return count_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  void accumulate(const TimeSeries& series) {
    series.check();
    if (!initialized_) {
      times_ = series.times;
      names_ = series.names;
      allocate();
    }
    require_same_grid(series.times, series.names);

    ++count_;
    const double n = static_cast<double>(count_);
    for (std::size_t k = 0; k < names_.size(); ++k) {
      for (std::size_t i = 0; i < times_.size(); ++i) {
        const double x = series.values[k][i];
        double& mu = mean_[k][i];
        const double delta = x - mu;
        mu += delta / n;
        m2_[k][i] += delta * (x - mu);
      }
    }
  }

  void merge(const EnsembleAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    require_same_grid(other.times_, other.names_);
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    for (std::size_t k = 0; k < names_.size(); ++k) {
      for (std::size_t i = 0; i < times_.size(); ++i) {
        const double delta = other.mean_[k][i] - mean_[k][i];
        mean_[k][i] += delta * (nb / n);
        m2_[k][i] += other.m2_[k][i] + delta * delta * (na * nb / n);
      }
    }
    count_ += other.count_;
  }

  /// Mean and standard error sqrt(s^2 / N) with the unbiased sample variance s^2.
  EnsembleSummary finalize() const {
    EnsembleSummary out;
    out.times = times_;
    out.names = names_;
    out.count = count_;
    out.std_error_undefined = count_ < 2;
    out.mean = mean_;
    out.std_error.assign(names_.size(), std::vector<double>(times_.size(), 0.0));
    if (count_ >= 2) {
      const double n = static_cast<double>(count_);
      for (std::size_t k = 0; k < names_.size(); ++k) {
        for (std::size_t i = 0; i < times_.size(); ++i) {
          const double variance = std::max(m2_[k][i], 0.0) / (n - 1.0);
          out.std_error[k][i] = std::sqrt(variance / n);
        }
      }
    }
    return out;
  }

 private:
  void allocate() {
    mean_.assign(names_.size(), std::vector<double>(times_.size(), 0.0));
    m2_ = mean_;
    initialized_ = true;
  }

  void require_same_grid(const std::vector<double>& times,
                         const std::vector<std::string>& names) const {
    if (times != times_) throw GridMismatch("accumulator time grids differ");
    if (names != names_) throw GridMismatch("accumulator observable lists differ");
  }

  std::vector<double> times_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> mean_;
  std::vector<std::vector<double>> m2_;
  std::size_t count_ = 0;
  bool initialized_ = false;
};

inline constexpr double kZFloor = 1e-12;

struct ComparisonReport {
  std::vector<double> abs_diff;
  std::vector<double> z;
  double max_abs_diff = 0.0;
  double max_z = 0.0;
  /// Points with z > z_max and |a - b| > abs_tol.
  std::size_t failing_points = 0;
  bool pass = true;
};

/// Pointwise comparison of `a` against `b` whose uncertainty is `b_stderr`.
/// A point is accepted when z = |a-b| / max(stderr, 1e-12) <= z_max or
/// |a-b| <= abs_tol; the comparison passes when every point is accepted.
inline ComparisonReport compare_series(const std::vector<double>& a, const std::vector<double>& b,
                                       const std::vector<double>& b_stderr, double abs_tol,
                                       double z_max) {
  if (a.size() != b.size() || b.size() != b_stderr.size()) {
    throw GridMismatch("compared series have different lengths");
  }
  ComparisonReport report;
  report.abs_diff.resize(a.size());
  report.z.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - b[i]);
    const double z = diff / std::max(b_stderr[i], kZFloor);
    report.abs_diff[i] = diff;
    report.z[i] = z;
    report.max_abs_diff = std::max(report.max_abs_diff, diff);
    report.max_z = std::max(report.max_z, z);
    if (!(z <= z_max) && !(diff <= abs_tol)) ++report.failing_points;
  }
  report.pass = report.failing_points == 0;
  return report;
}

}  // namespace nmqj
