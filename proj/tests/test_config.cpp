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

#include <filesystem>
#include <locale>
#include <sstream>
#include <string>

#include "nmqj/config.hpp"
#include "nmqj/csv.hpp"
#include "test_support.hpp"

namespace nmqj {
namespace {

std::string minimal_config(const std::string& extra = "") {
  return R"({
  "model": { "builtin": "two_band", "gamma1": 1.0, "gamma2": 1.0 },
  "initial": [ [1, 0], [0, 0] ],
  "dt": 0.001,
  "t_max": 1.0)" +
         extra + "\n}\n";
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, BuiltinTwoBandEqualsBuilder) {
  const auto parsed = parse_config(minimal_config());
  EXPECT_TRUE(models_equal(parsed.model, build_two_band(1.0, 1.0), 0.0));
  EXPECT_DOUBLE_EQ(parsed.config.dt, 1e-3);
  EXPECT_EQ(parsed.config.n_traj, 1u);
  ASSERT_EQ(parsed.config.observables.size(), 1u);
  EXPECT_EQ(parsed.config.observables[0].name, "excited_population");
}

TEST(Config, MicroscopicTwoBandParameters) {
  const auto parsed = parse_config(R"({
    "model": { "builtin": "two_band", "coupling": 0.1, "levels1": 50, "levels2": 100,
               "band_width": 1.0 },
    "initial": [ [1, 0], [0, 0] ], "dt": 0.001, "t_max": 1.0 })");
  EXPECT_TRUE(models_equal(parsed.model,
                           build_two_band(gamma_from_microscopic(0.1, 50, 1.0),
                                          gamma_from_microscopic(0.1, 100, 1.0)),
                           1e-15));
}

TEST(Config, MissingDtIsNamed) {
  const std::string text = R"({
    "model": { "builtin": "two_band", "gamma1": 1.0, "gamma2": 1.0 },
    "initial": [ [1, 0], [0, 0] ], "t_max": 1.0 })";
  EXPECT_NE(error_of(text).find("dt"), std::string::npos);
}

TEST(Config, UnknownKeysAreRejectedWithPath) {
  EXPECT_NE(error_of(minimal_config(R"(, "n_trajectories": 4)")).find("config.n_trajectories"),
            std::string::npos);
  EXPECT_NE(error_of(minimal_config(R"(, "options": {"shared": true})"))
                .find("config.options.shared"),
            std::string::npos);
}

TEST(Config, SyntaxErrorsCarryLineAndColumn) {
  const std::string text = "{\n  \"dt\": 0.1,\n  \"t_max\" 1.0\n}\n";
  try {
    parse_config(text, "broken.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_EQ(what.rfind("broken.cfg:3:", 0), 0u) << what;
    EXPECT_NE(what.find("syntax error"), std::string::npos);
  }
}

TEST(Config, SemanticErrors) {
  EXPECT_NE(error_of(minimal_config(R"(, "sample_stride": 0)")).find("sample_stride"),
            std::string::npos);
  const std::string bad_norm = R"({
    "model": { "builtin": "two_band", "gamma1": 1.0, "gamma2": 1.0 },
    "initial": [ [1, 0], [0.5, 0] ], "dt": 0.001, "t_max": 1.0 })";
  EXPECT_NE(error_of(bad_norm).find("config.initial"), std::string::npos);
  const std::string bad_rate = R"({
    "model": { "builtin": "two_band", "gamma1": -1.0, "gamma2": 1.0 },
    "initial": [ [1, 0], [0, 0] ], "dt": 0.001, "t_max": 1.0 })";
  EXPECT_NE(error_of(bad_rate).find("config.model.gamma1"), std::string::npos);
  EXPECT_NE(error_of(minimal_config(R"(, "observables": ["nope"])")).find("config.observables[0]"),
            std::string::npos);
}

TEST(Config, InvalidExplicitModelIsRejected) {
  const std::string text = R"({
    "model": { "components": 1, "hilbert_dim": 2,
               "hamiltonians": [ [[0, 1, 1, 0]] ] },
    "initial": [ [1, 0] ], "dt": 0.001, "t_max": 1.0 })";
  EXPECT_NE(error_of(text).find("not Hermitian"), std::string::npos);
  EXPECT_NO_THROW(parse_config(text, "config", /*check_model=*/false));
}

TEST(Config, ExplicitSpinBathFileEqualsBuilder) {
  const std::string text = R"({
    "model": {
      "components": 3, "hilbert_dim": 2,
      "hamiltonians": [ [], [], [] ],
      "jump_terms": [
        {"target": 1, "source": 0, "entries": [[0, 1, 1, 0]]},
        {"target": 0, "source": 1, "entries": [[1, 0, 1, 0]]},
        {"target": 2, "source": 1, "entries": [[0, 1, 1, 0]]},
        {"target": 1, "source": 2, "entries": [[1, 0, 1, 0]]}
      ]
    },
    "initial": [ [0.57735026918962576, 0], [0.57735026918962576, 0],
                 [0.57735026918962576, 0] ],
    "dt": 0.001, "t_max": 1.0 })";
  // Components are ordered m = 1, 0, -1; m feeds m+1 through sigma- and m-1 through sigma+.
  EXPECT_TRUE(models_equal(parse_config(text).model, build_spin_bath_n2(), 0.0));
}

TEST(Config, ObservablesAndOptions) {
  const auto parsed = parse_config(minimal_config(R"(,
    "observables": ["coherence_im", {"component_weight": 1},
                    {"name": "lower_e", "entries": [[0, 0, 1, 0]], "component": 0}],
    "options": {"shared_epsilon": false, "exact_exponential": true},
    "n_traj": 12, "master_seed": 7, "workers": 3, "sample_stride": 10, "output": "x.csv")"));
  const auto& cfg = parsed.config;
  ASSERT_EQ(cfg.observables.size(), 3u);
  EXPECT_EQ(cfg.observables[1].name, "component_weight_1");
  EXPECT_EQ(cfg.observables[2].component, std::optional<std::size_t>(0));
  EXPECT_FALSE(cfg.options.shared_epsilon);
  EXPECT_TRUE(cfg.options.exact_exponential);
  EXPECT_EQ(cfg.n_traj, 12u);
  EXPECT_EQ(cfg.master_seed, 7u);
  EXPECT_EQ(cfg.workers, 3u);
  EXPECT_EQ(cfg.sample_stride, 10u);
  EXPECT_EQ(cfg.output, "x.csv");
}

TEST(Config, ComplexAmplitudes) {
  const auto parsed = parse_config(R"({
    "model": { "builtin": "two_band", "gamma1": 1.0, "gamma2": 1.0 },
    "initial": [ [0.6, [0, 0.8]], [0, 0] ], "dt": 0.001, "t_max": 1.0 })");
  EXPECT_EQ(parsed.config.initial[0][1], Complex(0.0, 0.8));
}

TEST(ModelFile, SerializeRoundTripIsExact) {
  testing::Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto model = testing::random_model(rng, 1 + trial % 3, 2 + trial % 2);
    Json meta = {{"name", "random"}, {"trial", trial}};
    Json meta_back;
    const auto back = parse_model(serialize_model(model, meta), &meta_back);
    EXPECT_TRUE(models_equal(model, back, 1e-15)) << trial;
    EXPECT_EQ(meta_back, meta);
  }
  for (const auto& model : {build_two_band(0.3, 2.0), build_spin_bath_n2()}) {
    EXPECT_TRUE(models_equal(model, parse_model(serialize_model(model)), 0.0));
  }
}

TEST(ModelFile, ShippedConfigsParse) {
  const std::filesystem::path dir(NMQJ_CONFIG_DIR);
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".cfg") continue;
    ++count;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
  }
  EXPECT_GE(count, 4u);
  const auto fig4 = load_config((dir / "spin_bath_fig4.cfg").string());
  EXPECT_TRUE(models_equal(fig4.model, build_spin_bath_n2(), 0.0));
  EXPECT_EQ(fig4.config.n_traj, 4000u);
}

TEST(Csv, HeaderAndLineCounts) {
  CsvTable empty;
  empty.times = {};
  std::ostringstream os;
  write_csv(os, empty);
  EXPECT_EQ(os.str(), "t\n");

  EnsembleResult result;
  result.times = {0.0, 0.5};
  result.names = {"x"};
  result.mean = {{1.0, 0.25}};
  result.std_error = {{0.0, 0.125}};
  std::ostringstream os2;
  write_csv(os2, to_table(result));
  EXPECT_EQ(os2.str(), "t,x,x_stderr\n0,1,0\n0.5,0.25,0.125\n");
}

TEST(Csv, SeventeenSignificantDigitsRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.33333333333333331");
  testing::Rng rng(5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

TEST(Csv, LocaleIndependent) {
  const std::locale saved =
      std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  CsvTable table;
  table.columns = {"x"};
  table.times = {1234.5};
  table.values = {{0.25}};
  std::ostringstream os;
  os.imbue(std::locale());
  write_csv(os, table);
  std::istringstream is(os.str());
  const auto back = read_csv(is);
  std::locale::global(saved);
  EXPECT_EQ(os.str(), "t,x\n1234.5,0.25\n");
  EXPECT_EQ(back.times, table.times);
  EXPECT_EQ(back.values, table.values);
}

TEST(Csv, ReadBackAndErrors) {
  std::istringstream good("t,a,a_stderr\r\n0,1,0\r\n1,0.5,0.1\r\n");
  const auto table = read_csv(good);
  EXPECT_EQ(table.columns, (std::vector<std::string>{"a", "a_stderr"}));
  EXPECT_EQ(table.find("a_stderr"), std::optional<std::size_t>(1));
  EXPECT_EQ(table.values[0], (std::vector<double>{1.0, 0.5}));
  std::istringstream ragged("t,a\n0,1,2\n");
  EXPECT_THROW(read_csv(ragged), Error);
  std::istringstream junk("t,a\n0,abc\n");
  EXPECT_THROW(read_csv(junk), Error);
  std::istringstream header("time,a\n");
  EXPECT_THROW(read_csv(header), Error);
}

TEST(Csv, EmitFileMatchesStream) {
  TimeSeries s{{0.0, 1.0}, {"y"}, {{0.5, 0.75}}};
  const auto path = std::filesystem::temp_directory_path() / "nmqj_emit_test.csv";
  emit_csv(s, path.string());
  EXPECT_EQ(read_text_file(path.string()), "t,y\n0,0.5\n1,0.75\n");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace nmqj
