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

// Simulation configs and model files are JSON documents (comments allowed).
//
//   {
//     "model": { "builtin": "two_band", "gamma1": 1.0, "gamma2": 1.0 },
//     "initial": [ [[1, 0], [0, 0]], [[0, 0], [0, 0]] ],
//     "dt": 0.001, "t_max": 5.0, "sample_stride": 100,
//     "n_traj": 400, "master_seed": 2024, "workers": 0,
//     "observables": ["excited_population", {"component_weight": 1}],
//     "output": "fig2.csv"
//   }
//
// An explicit model lists operators as sparse [row, col, re, im] triplets:
//
//   "model": {
//     "components": 2, "hilbert_dim": 2,
//     "hamiltonians": [ [], [] ],
//     "jump_terms": [ {"target": 0, "source": 1, "label": 0, "entries": [[0, 1, 1, 0]]} ],
//     "metadata": { "name": "two band" }
//   }

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nmqj/error.hpp"
#include "nmqj/linalg.hpp"
#include "nmqj/model.hpp"
#include "nmqj/observables.hpp"
#include "nmqj/trajectory.hpp"

namespace nmqj {

using Json = nlohmann::json;

struct SimulationConfig {
  std::vector<StateVector> initial;
  double dt = 0.0;
  double t_max = 0.0;
  std::size_t sample_stride = 1;
  std::size_t n_traj = 1;
  std::uint64_t master_seed = 0;
  unsigned workers = 0;
  std::vector<Observable> observables;
  std::string output;
  EngineOptions options{};

  TrajectoryState initial_state() const { return {0.0, initial}; }

  DensityComponents initial_density() const {
    DensityComponents rho;
    for (const auto& psi : initial) rho.push_back(outer(psi));
    return rho;
  }

  EnsembleSettings ensemble_settings() const {
    return {{dt, t_max, sample_stride, options}, n_traj, master_seed, workers};
  }
};

struct ParsedConfig {
  SimulationConfig config;
  GeneralizedLindbladModel model;
  Json metadata = Json::object();
};

namespace detail {

/// Object reader that tracks consumed keys so leftovers can be rejected.
class JsonObject {
 public:
  JsonObject(const Json& value, std::string path) : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }
  const std::string& path() const noexcept { return path_; }

  bool has(const std::string& key) const { return value_.contains(key); }

  const Json& require(const std::string& key) {
    if (!value_.contains(key)) fail(child(key), "missing required field '" + key + "'");
    used_.insert(key);
    return value_.at(key);
  }

  const Json* optional(const std::string& key) {
    if (!value_.contains(key)) return nullptr;
    used_.insert(key);
    return &value_.at(key);
  }

  void finish() const {
    for (const auto& [key, unused] : value_.items()) {
      if (!used_.count(key)) fail(child(key), "unknown key '" + key + "'");
    }
  }

 private:
  const Json& value_;
  std::string path_;
  std::set<std::string> used_;
};

inline double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) JsonObject::fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) JsonObject::fail(path, "expected a finite number");
  return x;
}

inline std::uint64_t as_unsigned(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  JsonObject::fail(path, "expected a nonnegative integer");
}

inline long as_integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) JsonObject::fail(path, "expected an integer");
  return v.get<long>();
}

inline bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) JsonObject::fail(path, "expected true or false");
  return v.get<bool>();
}

inline std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) JsonObject::fail(path, "expected a string");
  return v.get<std::string>();
}

inline const Json& as_array(const Json& v, const std::string& path) {
  if (!v.is_array()) JsonObject::fail(path, "expected an array");
  return v;
}

inline std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

/// Amplitude: a real number or a [re, im] pair.
inline Complex as_complex(const Json& v, const std::string& path) {
  if (v.is_number()) return {as_number(v, path), 0.0};
  if (v.is_array() && v.size() == 2) {
    return {as_number(v[0], index_path(path, 0)), as_number(v[1], index_path(path, 1))};
  }
  JsonObject::fail(path, "expected a number or a [re, im] pair");
}

inline std::vector<double> as_number_list(const Json& v, const std::string& path) {
  std::vector<double> out;
  const Json& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(as_number(arr[i], index_path(path, i)));
  }
  return out;
}

/// Sparse [row, col, re, im] triplets into a dense d x d matrix.
inline ComplexMatrix as_triplets(const Json& v, std::size_t d, const std::string& path) {
  const auto dim = static_cast<Eigen::Index>(d);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  const Json& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = index_path(path, i);
    const Json& t = arr[i];
    if (!t.is_array() || t.size() != 4) JsonObject::fail(p, "expected [row, col, re, im]");
    const auto row = as_unsigned(t[0], index_path(p, 0));
    const auto col = as_unsigned(t[1], index_path(p, 1));
    if (row >= d || col >= d) JsonObject::fail(p, "entry index outside the hilbert dimension");
    if (!seen.emplace(row, col).second) JsonObject::fail(p, "duplicate entry");
    out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
        Complex(as_number(t[2], index_path(p, 2)), as_number(t[3], index_path(p, 3)));
  }
  return out;
}

inline std::size_t positive_size(const Json& v, const std::string& path) {
  const auto x = as_unsigned(v, path);
  if (x < 1) JsonObject::fail(path, "must be at least 1");
  return static_cast<std::size_t>(x);
}

inline GeneralizedLindbladModel parse_explicit_model(JsonObject& obj, Json& metadata) {
  GeneralizedLindbladModel model;
  model.num_components = positive_size(obj.require("components"), obj.child("components"));
  model.hilbert_dim = positive_size(obj.require("hilbert_dim"), obj.child("hilbert_dim"));
  const auto d = static_cast<Eigen::Index>(model.hilbert_dim);
  model.hamiltonians.assign(model.num_components, ComplexMatrix::Zero(d, d));

  if (const Json* hs = obj.optional("hamiltonians")) {
    const std::string path = obj.child("hamiltonians");
    as_array(*hs, path);
    if (hs->size() != model.num_components) {
      JsonObject::fail(path, "expected " + std::to_string(model.num_components) + " entries");
    }
    for (std::size_t m = 0; m < hs->size(); ++m) {
      model.hamiltonians[m] = as_triplets((*hs)[m], model.hilbert_dim, index_path(path, m));
    }
  }
  if (const Json* terms = obj.optional("jump_terms")) {
    const std::string path = obj.child("jump_terms");
    as_array(*terms, path);
    for (std::size_t k = 0; k < terms->size(); ++k) {
      JsonObject t((*terms)[k], index_path(path, k));
      JumpTerm term;
      term.target = static_cast<std::size_t>(as_unsigned(t.require("target"), t.child("target")));
      term.source = static_cast<std::size_t>(as_unsigned(t.require("source"), t.child("source")));
      if (const Json* label = t.optional("label")) {
        term.label = static_cast<int>(as_integer(*label, t.child("label")));
      }
      term.op = as_triplets(t.require("entries"), model.hilbert_dim, t.child("entries"));
      t.finish();
      model.jump_terms.push_back(std::move(term));
    }
  }
  if (const Json* meta = obj.optional("metadata")) {
    if (!meta->is_object()) JsonObject::fail(obj.child("metadata"), "expected an object");
    metadata = *meta;
  }
  return model;
}

inline double rate_field(JsonObject& obj, const std::string& key) {
  const double x = as_number(obj.require(key), obj.child(key));
  if (x < 0.0) JsonObject::fail(obj.child(key), "rate must be nonnegative");
  return x;
}

inline GeneralizedLindbladModel parse_two_band(JsonObject& obj) {
  if (obj.has("gamma1") || obj.has("gamma2")) {
    return build_two_band(rate_field(obj, "gamma1"), rate_field(obj, "gamma2"));
  }
  // Microscopic parameters: gamma_i = 2 pi coupling^2 levels_i / band_width.
  const double coupling = as_number(obj.require("coupling"), obj.child("coupling"));
  const long n1 = as_integer(obj.require("levels1"), obj.child("levels1"));
  const long n2 = as_integer(obj.require("levels2"), obj.child("levels2"));
  const double width = as_number(obj.require("band_width"), obj.child("band_width"));
  try {
    return build_two_band(gamma_from_microscopic(coupling, n1, width),
                          gamma_from_microscopic(coupling, n2, width));
  } catch (const std::invalid_argument& e) {
    JsonObject::fail(obj.path(), e.what());
  }
}

inline GeneralizedLindbladModel parse_spin_bath(JsonObject& obj) {
  std::vector<int> labels{1, 0, -1};
  if (const Json* mv = obj.optional("m_values")) {
    labels.clear();
    const std::string path = obj.child("m_values");
    as_array(*mv, path);
    for (std::size_t i = 0; i < mv->size(); ++i) {
      labels.push_back(static_cast<int>(as_integer((*mv)[i], index_path(path, i))));
    }
  }
  std::vector<double> f;
  std::vector<double> g;
  if (obj.has("f") || obj.has("g")) {
    if (obj.has("rate")) JsonObject::fail(obj.child("rate"), "give either 'rate' or 'f'/'g'");
    f = as_number_list(obj.require("f"), obj.child("f"));
    g = as_number_list(obj.require("g"), obj.child("g"));
  } else {
    // One rate on every admissible (interior) channel.
    double rate = 1.0;
    if (const Json* r = obj.optional("rate")) rate = as_number(*r, obj.child("rate"));
    std::set<int> present(labels.begin(), labels.end());
    for (int m : labels) {
      f.push_back(present.count(m + 1) ? rate : 0.0);
      g.push_back(present.count(m - 1) ? rate : 0.0);
    }
  }
  try {
    return build_spin_bath(f, g, labels);
  } catch (const std::invalid_argument& e) {
    JsonObject::fail(obj.path(), e.what());
  }
}

inline GeneralizedLindbladModel parse_amplitude_damping(JsonObject& obj) {
  const double gamma = rate_field(obj, "gamma");
  GeneralizedLindbladModel model;
  model.num_components = 1;
  model.hilbert_dim = 2;
  model.hamiltonians = {ComplexMatrix::Zero(2, 2)};
  model.jump_terms.push_back({0, 0, 0, std::sqrt(gamma) * sigma_minus()});
  return model;
}

inline GeneralizedLindbladModel parse_model_object(const Json& value, const std::string& path,
                                                   Json& metadata) {
  JsonObject obj(value, path);
  GeneralizedLindbladModel model;
  if (const Json* b = obj.optional("builtin")) {
    const std::string name = as_string(*b, obj.child("builtin"));
    if (name == "two_band") {
      model = parse_two_band(obj);
    } else if (name == "spin_bath") {
      model = parse_spin_bath(obj);
    } else if (name == "amplitude_damping") {
      model = parse_amplitude_damping(obj);
    } else {
      JsonObject::fail(obj.child("builtin"), "unknown builtin model '" + name + "'");
    }
    if (const Json* meta = obj.optional("metadata")) {
      if (!meta->is_object()) JsonObject::fail(obj.child("metadata"), "expected an object");
      metadata = *meta;
    }
  } else {
    model = parse_explicit_model(obj, metadata);
  }
  obj.finish();
  return model;
}

inline Observable parse_observable(const Json& v, const std::string& path, std::size_t d,
                                   std::size_t num_components) {
  try {
    if (v.is_string()) return observables::preset(v.get<std::string>(), d);
    JsonObject obj(v, path);
    Observable out;
    if (const Json* cw = obj.optional("component_weight")) {
      const auto m = as_unsigned(*cw, obj.child("component_weight"));
      out = observables::component_weight(static_cast<std::size_t>(m), d);
      if (const Json* name = obj.optional("name")) out.name = as_string(*name, obj.child("name"));
    } else {
      out.name = as_string(obj.require("name"), obj.child("name"));
      out.op = as_triplets(obj.require("entries"), d, obj.child("entries"));
      if (const Json* c = obj.optional("component")) {
        out.component = static_cast<std::size_t>(as_unsigned(*c, obj.child("component")));
      }
    }
    obj.finish();
    check_observable(out, d, num_components);
    return out;
  } catch (const std::invalid_argument& e) {
    JsonObject::fail(path, e.what());
  }
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    std::string what = e.what();
    // Keep only the human-readable tail of nlohmann's message.
    if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": syntax error: " + what);
  }
}

}  // namespace detail

/// Parses a model document (the `model` object on its own).
inline GeneralizedLindbladModel parse_model(const std::string& text, Json* metadata = nullptr,
                                            const std::string& origin = "model") {
  const Json doc = detail::parse_json(text, origin);
  Json meta = Json::object();
  GeneralizedLindbladModel model = detail::parse_model_object(doc, "model", meta);
  if (metadata) *metadata = std::move(meta);
  return model;
}

/// Explicit-form model document. parse_model(serialize_model(m)) == m entrywise.
inline std::string serialize_model(const GeneralizedLindbladModel& model,
                                   const Json& metadata = Json::object()) {
  auto triplets = [](const ComplexMatrix& a) {
    Json list = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const Complex z = a(r, c);
        if (z != Complex(0.0, 0.0)) list.push_back({r, c, z.real(), z.imag()});
      }
    }
    return list;
  };

  Json doc;
  doc["components"] = model.num_components;
  doc["hilbert_dim"] = model.hilbert_dim;
  Json hs = Json::array();
  for (const auto& h : model.hamiltonians) hs.push_back(triplets(h));
  doc["hamiltonians"] = std::move(hs);
  Json terms = Json::array();
  for (const auto& t : model.jump_terms) {
    terms.push_back({{"target", t.target},
                     {"source", t.source},
                     {"label", t.label},
                     {"entries", triplets(t.op)}});
  }
  doc["jump_terms"] = std::move(terms);
  doc["metadata"] = metadata.is_object() ? metadata : Json::object();
  return doc.dump(2) + "\n";
}

/// Parses a full simulation config. With `check_model` the model must pass
/// validate(); `validate` on the CLI turns this off to print the report.
inline ParsedConfig parse_config(const std::string& text, const std::string& origin = "config",
                                 bool check_model = true) {
  using detail::JsonObject;
  const Json doc = detail::parse_json(text, origin);
  JsonObject root(doc, "config");

  ParsedConfig parsed;
  parsed.model =
      detail::parse_model_object(root.require("model"), root.child("model"), parsed.metadata);
  if (check_model) {
    const auto report = validate(parsed.model);
    if (!report.ok()) throw ConfigError("config.model: invalid model:\n" + report.to_string());
  }
  const std::size_t d = parsed.model.hilbert_dim;
  const std::size_t big_m = parsed.model.num_components;
  auto& cfg = parsed.config;

  {
    const std::string path = root.child("initial");
    const Json& init = detail::as_array(root.require("initial"), path);
    if (init.size() != big_m) {
      JsonObject::fail(path, "expected " + std::to_string(big_m) + " component states");
    }
    for (std::size_t m = 0; m < init.size(); ++m) {
      const std::string p = detail::index_path(path, m);
      const Json& amps = detail::as_array(init[m], p);
      if (amps.size() != d) JsonObject::fail(p, "expected " + std::to_string(d) + " amplitudes");
      StateVector psi(static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i) {
        psi[static_cast<Eigen::Index>(i)] = detail::as_complex(amps[i], detail::index_path(p, i));
      }
      cfg.initial.push_back(std::move(psi));
    }
    double w = 0.0;
    for (const auto& psi : cfg.initial) w += psi.squaredNorm();
    if (std::abs(w - 1.0) > kInitialNormTolerance) {
      JsonObject::fail(path, "total squared norm must be 1, got " + std::to_string(w));
    }
  }

  cfg.dt = detail::as_number(root.require("dt"), root.child("dt"));
  if (!(cfg.dt > 0.0)) JsonObject::fail(root.child("dt"), "must be positive");
  cfg.t_max = detail::as_number(root.require("t_max"), root.child("t_max"));
  if (!(cfg.t_max > 0.0)) JsonObject::fail(root.child("t_max"), "must be positive");
  if (const Json* s = root.optional("sample_stride")) {
    cfg.sample_stride = detail::positive_size(*s, root.child("sample_stride"));
  }
  if (const Json* n = root.optional("n_traj")) {
    cfg.n_traj = detail::positive_size(*n, root.child("n_traj"));
  }
  if (const Json* s = root.optional("master_seed")) {
    cfg.master_seed = detail::as_unsigned(*s, root.child("master_seed"));
  }
  if (const Json* w = root.optional("workers")) {
    const auto workers = detail::as_unsigned(*w, root.child("workers"));
    if (workers > std::numeric_limits<unsigned>::max()) {
      JsonObject::fail(root.child("workers"), "too large");
    }
    cfg.workers = static_cast<unsigned>(workers);
  }
  if (const Json* obs = root.optional("observables")) {
    const std::string path = root.child("observables");
    detail::as_array(*obs, path);
    for (std::size_t k = 0; k < obs->size(); ++k) {
      cfg.observables.push_back(
          detail::parse_observable((*obs)[k], detail::index_path(path, k), d, big_m));
    }
  } else {
    cfg.observables.push_back(
        detail::parse_observable("excited_population", root.child("observables"), d, big_m));
  }
  if (const Json* out = root.optional("output")) {
    cfg.output = detail::as_string(*out, root.child("output"));
  }
  if (const Json* opts = root.optional("options")) {
    JsonObject o(*opts, root.child("options"));
    if (const Json* v = o.optional("shared_epsilon")) {
      cfg.options.shared_epsilon = detail::as_bool(*v, o.child("shared_epsilon"));
    }
    if (const Json* v = o.optional("exact_exponential")) {
      cfg.options.exact_exponential = detail::as_bool(*v, o.child("exact_exponential"));
    }
    o.finish();
  }
  root.finish();
  return parsed;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ParsedConfig load_config(const std::string& path, bool check_model = true) {
  return parse_config(read_text_file(path), path, check_model);
}

}  // namespace nmqj
