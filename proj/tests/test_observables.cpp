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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nmqj/integrator.hpp"
#include "nmqj/observables.hpp"
#include "nmqj/statistics.hpp"
#include "test_support.hpp"

namespace nmqj {
namespace {

using testing::excited;
using testing::ground;
using testing::zero2;

TimeSeries series(std::vector<double> times, std::vector<double> values) {
  return {std::move(times), {"x"}, {std::move(values)}};
}

TEST(Expectation, WavefunctionExamples) {
  const TrajectoryState split{0.0, {0.8 * excited(), 0.6 * ground()}};
  EXPECT_NEAR(expectation_wavefunction(split, observables::excited_population(2)), 0.64, 1e-15);
  EXPECT_NEAR(expectation_wavefunction(split, observables::total_weight(2)), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(expectation_wavefunction({0.0, {excited(), zero2()}}, sigma_z()), 1.0);
  EXPECT_NEAR(expectation_wavefunction(split, observables::component_weight(1, 2)), 0.36, 1e-15);
}

TEST(Expectation, CoherencePresets) {
  const Complex a = 0.6;
  const Complex b{0.0, 0.8};
  const TrajectoryState state{0.0, {testing::ket({a, b}), zero2()}};
  // rho_eg = a b*
  const Complex rho_eg = a * std::conj(b);
  EXPECT_NEAR(expectation_wavefunction(state, observables::coherence_re(2)), rho_eg.real(), 1e-15);
  EXPECT_NEAR(expectation_wavefunction(state, observables::coherence_im(2)), rho_eg.imag(), 1e-15);
}

TEST(Expectation, IdentityEqualsTotalWeightExactly) {
  testing::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto state = testing::random_state(rng, 3, 3);
    state.components[1] *= 0.7;
    const auto id = ComplexMatrix::Identity(3, 3);
    EXPECT_NEAR(expectation_wavefunction(state, id), state.total_weight(), 1e-15);
  }
}

TEST(Expectation, DensityAgreesWithWavefunction) {
  testing::Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const std::size_t d = 2 + trial % 3;
    const auto state = testing::random_state(rng, m, d);
    const ComplexMatrix a = testing::random_hermitian(rng, d);
    const auto rho = density_from_state(state);
    EXPECT_NEAR(expectation_wavefunction(state, a), expectation_density(rho, a), 1e-12);
  }
}

TEST(Expectation, SpinBathInitialState) {
  const DensityComponents rho(3, outer(excited()) / 3.0);
  EXPECT_NEAR(expectation_density(rho, observables::excited_population(2)), 1.0, 1e-15);
  EXPECT_NEAR(expectation_density(rho, observables::total_weight(2)), 1.0, 1e-15);
}

TEST(Expectation, ImaginaryResidueIsRejected) {
  ComplexMatrix skew = ComplexMatrix::Zero(2, 2);
  skew(0, 1) = 1.0;
  skew(1, 0) = -1.0;
  const TrajectoryState state{0.0, {testing::ket({M_SQRT1_2, Complex(0.0, M_SQRT1_2)}), zero2()}};
  EXPECT_THROW(expectation_wavefunction(state, skew), ImaginaryResidue);
  EXPECT_THROW(expectation_density(density_from_state(state), skew), ImaginaryResidue);
}

TEST(Observables, PresetsAndChecks) {
  EXPECT_EQ(observables::preset("sigma_z", 2).name, "sigma_z");
  EXPECT_THROW(observables::preset("nope", 2), std::invalid_argument);
  EXPECT_THROW(observables::sigma_z(3), std::invalid_argument);
  EXPECT_EQ(observables::component_weight(2, 2).name, "component_weight_2");
  EXPECT_THROW(check_observable(observables::component_weight(3, 2), 2, 3), std::invalid_argument);
  EXPECT_THROW(check_observable({"bad", sigma_plus(), std::nullopt}, 2, 1), std::invalid_argument);
  EXPECT_THROW(check_observable(observables::total_weight(3), 2, 1), std::invalid_argument);
  EXPECT_NO_THROW(check_observable(observables::coherence_im(2), 2, 1));
}

TEST(Accumulator, SingleSeriesHasUndefinedStderr) {
  EnsembleAccumulator acc;
  acc.accumulate(series({0.0, 1.0}, {0.3, 0.7}));
  const auto s = acc.finalize();
  EXPECT_EQ(s.count, 1u);
  EXPECT_TRUE(s.std_error_undefined);
  EXPECT_EQ(s.mean[0], (std::vector<double>{0.3, 0.7}));
  EXPECT_EQ(s.std_error[0], (std::vector<double>{0.0, 0.0}));
}

TEST(Accumulator, ConstantSeries) {
  EnsembleAccumulator acc;
  acc.accumulate(series({0.0}, {0.25}));
  acc.accumulate(series({0.0}, {0.25}));
  const auto s = acc.finalize();
  EXPECT_FALSE(s.std_error_undefined);
  EXPECT_EQ(s.mean[0][0], 0.25);
  EXPECT_EQ(s.std_error[0][0], 0.0);
}

TEST(Accumulator, ZeroAndOne) {
  EnsembleAccumulator acc;
  acc.accumulate(series({0.0}, {0.0}));
  acc.accumulate(series({0.0}, {1.0}));
  const auto s = acc.finalize();
  EXPECT_DOUBLE_EQ(s.mean[0][0], 0.5);
  EXPECT_DOUBLE_EQ(s.std_error[0][0], 0.5);
}

TEST(Accumulator, MatchesTwoPassStatistics) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(1.0, 2.0);
  std::vector<double> xs(1000);
  EnsembleAccumulator acc;
  for (auto& x : xs) {
    x = normal(rng);
    acc.accumulate(series({0.0}, {x}));
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(xs.size());
  const auto s = acc.finalize();
  EXPECT_NEAR(s.mean[0][0], mean, 1e-12);
  EXPECT_NEAR(s.std_error[0][0], std::sqrt(ss / (n - 1.0) / n), 1e-12);
}

TEST(Accumulator, MergeMatchesSequentialAndIsAssociative) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<double> t{0.0, 0.5, 1.0};
  std::vector<TimeSeries> data;
  for (int j = 0; j < 30; ++j) data.push_back(series(t, {u(rng), u(rng), u(rng)}));

  auto fill = [&](int first, int last) {
    EnsembleAccumulator acc(t, {"x"});
    for (int j = first; j < last; ++j) acc.accumulate(data[static_cast<std::size_t>(j)]);
    return acc;
  };
  const auto all = fill(0, 30).finalize();

  auto left = fill(0, 7);
  auto mid = fill(7, 19);
  const auto right = fill(19, 30);
  auto ab = left;
  ab.merge(mid);
  ab.merge(right);
  auto bc = mid;
  bc.merge(right);
  left.merge(bc);
  const auto s1 = ab.finalize();
  const auto s2 = left.finalize();
  EXPECT_EQ(s1.count, 30u);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(s1.mean[0][i], all.mean[0][i], 1e-14);
    EXPECT_NEAR(s1.std_error[0][i], all.std_error[0][i], 1e-14);
    EXPECT_NEAR(s1.mean[0][i], s2.mean[0][i], 1e-14);
    EXPECT_NEAR(s1.std_error[0][i], s2.std_error[0][i], 1e-14);
  }
  // Fixed order reproduces bit for bit.
  auto again = fill(0, 7);
  again.merge(fill(7, 19));
  again.merge(fill(19, 30));
  EXPECT_EQ(again.finalize().mean, s1.mean);
}

TEST(Accumulator, GridMismatch) {
  EnsembleAccumulator acc({0.0, 1.0}, {"x"});
  EXPECT_THROW(acc.accumulate(series({0.0, 2.0}, {1.0, 1.0})), GridMismatch);
  EXPECT_THROW(acc.accumulate(TimeSeries{{0.0, 1.0}, {"y"}, {{1.0, 1.0}}}), GridMismatch);
  EXPECT_THROW(acc.accumulate(series({0.0, 1.0}, {1.0})), GridMismatch);
  EXPECT_THROW(acc.accumulate(series({1.0, 0.0}, {1.0, 1.0})), GridMismatch);
  EnsembleAccumulator other({0.0}, {"x"});
  other.accumulate(series({0.0}, {1.0}));
  acc.accumulate(series({0.0, 1.0}, {1.0, 1.0}));
  EXPECT_THROW(acc.merge(other), GridMismatch);
}

TEST(Compare, IdenticalSeriesPass) {
  const std::vector<double> a{0.1, 0.2, 0.3};
  const auto r = compare_series(a, a, {0.01, 0.01, 0.01}, 0.0, 3.0);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_z, 0.0);
  EXPECT_EQ(r.max_abs_diff, 0.0);
}

TEST(Compare, TenSigmaOffsetFails) {
  const std::vector<double> b{0.1, 0.2, 0.3};
  const std::vector<double> err{0.01, 0.01, 0.01};
  std::vector<double> a = b;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += 10.0 * err[i];
  const auto r = compare_series(a, b, err, 0.05, 3.0);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.failing_points, 3u);
  EXPECT_NEAR(r.max_z, 10.0, 1e-9);
}

TEST(Compare, EitherCriterionAcceptsAPoint) {
  const std::vector<double> b{0.0, 0.0};
  // First point: z huge but within abs_tol. Second: beyond abs_tol but z small.
  const auto r = compare_series({0.01, 0.2}, b, {0.0, 0.1}, 0.05, 3.0);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.z[0], 0.01 / kZFloor, 1.0);
  EXPECT_NEAR(r.z[1], 2.0, 1e-12);
}

TEST(Compare, LengthMismatch) {
  EXPECT_THROW(compare_series({0.0}, {0.0, 1.0}, {0.0, 0.0}, 0.05, 3.0), GridMismatch);
}

TEST(Compare, TwoBandEnsembleAgainstClosedForm) {
  EnsembleSettings settings;
  settings.trajectory = {1e-3, 1.0, 1000, {}};
  settings.n_traj = 400;
  settings.master_seed = 1;
  const auto result =
      run_ensemble(build_two_band(1.0, 1.0), {0.0, {excited(), zero2()}},
                   {observables::excited_population(2)}, settings);
  ASSERT_EQ(result.times.size(), 2u);
  // Weights in this setup evolve deterministically, so only the O(dt) bias
  // of the first-order step is left.
  EXPECT_NEAR(result.mean[0][1], 0.5676676416, 2e-3);
  std::vector<double> exact;
  for (double t : result.times) {
    exact.push_back(closed_form_two_band(1.0, 1.0, 1.0, 0.0, t)[0](kExcited, kExcited).real());
  }
  EXPECT_TRUE(compare_series(result.mean[0], exact, result.std_error[0], 0.05, 3.0).pass);
}

}  // namespace
}  // namespace nmqj
