#pragma once

// Pipeline configuration: one JSON document with a fixed key schema. Every
// tunable constant has a default here; unknown keys are rejected.
//
// {
//   "seed": 42,
//   "geometry":   {"wavelength": 0.06, "separation": 1.2, "n_max": 8},
//   "simulation": {"center_frequency": 5.32e9, "n_subcarriers": 30,
//                  "subcarrier_spacing": 312500, "los_amplitude": 20,
//                  "reflection_coefficient": 0.7, "noise_std": 0.5},
//   "dataset":    {"n_subjects": 14, "reps_per_class": 60,
//                  "subject_variation": 0.15, "repetition_variation": 0.08,
//                  "duration_s": 2.0, "sample_rate": 100,
//                  "placement_offset": 0.40,
//                  "classes": [{"label": "happy", "amplitude_m": 0.06,
//                               "frequency_hz": 2.2, "sway_ratio": 0.6}, ...]},
//   "filter":     {"cutoff_hz": 15, "sample_rate": 100, "order": 4, "zero_phase": true},
//   "features":   {"entropy_bins": 16, "aggregation": "mean"},
//   "classifier": {"kind": "knn", "k": 5},
//   "evaluation": {"protocols": ["inset", "ten_fold", "person_dependent", "person_independent"],
//                  "train_fraction": 0.5, "group_by": "gender"},
//   "paths":      {"dataset_dir": "", "output_dir": "out", "write_traces": false}
// }

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csisense/classify.hpp"
#include "csisense/detail/text.hpp"
#include "csisense/eval.hpp"
#include "csisense/features.hpp"
#include "csisense/preprocess.hpp"
#include "csisense/sim.hpp"

namespace csisense {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::uint64_t seed = 42;

  // Link planning
  double wavelength = 0.06;
  double separation = 1.2;
  std::size_t n_max = 8;

  // Simulation (the link uses `separation`; per-subcarrier wavelengths
  // follow from the carrier frequency)
  double center_frequency = 5.32e9;
  std::size_t n_subcarriers = 30;
  double subcarrier_spacing = 312.5e3;
  double los_amplitude = 20.0;
  double reflection_coefficient = 0.7;
  double noise_std = 0.5;

  GestureDatasetSpec dataset;
  FilterSpec filter;
  FeatureConfig features;
  ClassifierSpec classifier;

  std::vector<Protocol> protocols = {Protocol::kInset, Protocol::kTenFold, Protocol::kPersonDependent,
                                     Protocol::kPersonIndependent};
  double train_fraction = 0.5;
  std::string group_by = "gender";

  std::string dataset_dir;
  std::string output_dir = "out";
  bool write_traces = false;

  SimConfig sim_config() const {
    SimConfig s;
    s.geometry = TransceiverGeometry::on_axis(separation, kSpeedOfLight / center_frequency);
    s.center_frequency = center_frequency;
    s.n_subcarriers = n_subcarriers;
    s.subcarrier_spacing = subcarrier_spacing;
    s.los_amplitude = los_amplitude;
    s.reflection_coefficient = reflection_coefficient;
    s.noise_std = noise_std;
    s.seed = seed;
    return s;
  }

  ProtocolSpec protocol_spec(Protocol p) const { return {p, train_fraction, seed}; }

  void validate() const {
    auto check = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("config: ") + what);
    };
    check(wavelength > 0.0, "geometry.wavelength must be positive");
    check(separation > 0.0, "geometry.separation must be positive");
    check(classifier.k >= 1, "classifier.k must be >= 1");
    check(features.entropy_bins >= 1, "features.entropy_bins must be >= 1");
    check(train_fraction > 0.0 && train_fraction <= 1.0, "evaluation.train_fraction must lie in (0, 1]");
    check(!protocols.empty(), "evaluation.protocols must not be empty");
    try {
      sim_config().validate();
      dataset.validate();
      filter.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    check(dataset.sample_rate == filter.sample_rate, "dataset.sample_rate must equal filter.sample_rate");
  }

  /// Canonical description of everything that shapes a feature row.
  std::string feature_key() const {
    using detail::format_double;
    return "filter:" + format_double(filter.cutoff_hz) + "," + format_double(filter.sample_rate) + "," +
           std::to_string(filter.order) + "," + (filter.zero_phase ? "1" : "0") +
           ";features:" + std::to_string(features.entropy_bins) + "," + std::string(to_string(features.aggregation));
  }

  std::uint64_t feature_hash() const { return detail::fnv1a(feature_key()); }
};

namespace detail {

inline void only_keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [k, _] : obj.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError("config: unknown key '" + where + "." + k + "'");
  }
}

template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: bad value for '" + where + "." + key + "'");
  }
}

}  // namespace detail

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  using detail::only_keys;
  using detail::read_key;
  PipelineConfig c;
  only_keys(j, "", {"seed", "geometry", "simulation", "dataset", "filter", "features", "classifier", "evaluation",
                    "paths"});
  read_key(j, "seed", c.seed, "");
  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    only_keys(g, "geometry", {"wavelength", "separation", "n_max"});
    read_key(g, "wavelength", c.wavelength, "geometry");
    read_key(g, "separation", c.separation, "geometry");
    read_key(g, "n_max", c.n_max, "geometry");
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    only_keys(s, "simulation", {"center_frequency", "n_subcarriers", "subcarrier_spacing", "los_amplitude",
                                "reflection_coefficient", "noise_std"});
    read_key(s, "center_frequency", c.center_frequency, "simulation");
    read_key(s, "n_subcarriers", c.n_subcarriers, "simulation");
    read_key(s, "subcarrier_spacing", c.subcarrier_spacing, "simulation");
    read_key(s, "los_amplitude", c.los_amplitude, "simulation");
    read_key(s, "reflection_coefficient", c.reflection_coefficient, "simulation");
    read_key(s, "noise_std", c.noise_std, "simulation");
  }
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    only_keys(d, "dataset", {"n_subjects", "reps_per_class", "subject_variation", "repetition_variation",
                             "duration_s", "sample_rate", "placement_offset", "classes"});
    read_key(d, "n_subjects", c.dataset.n_subjects, "dataset");
    read_key(d, "reps_per_class", c.dataset.reps_per_class, "dataset");
    read_key(d, "subject_variation", c.dataset.subject_variation, "dataset");
    read_key(d, "repetition_variation", c.dataset.repetition_variation, "dataset");
    read_key(d, "duration_s", c.dataset.duration_s, "dataset");
    read_key(d, "sample_rate", c.dataset.sample_rate, "dataset");
    read_key(d, "placement_offset", c.dataset.placement_offset, "dataset");
    if (d.contains("classes")) {
      if (!d["classes"].is_array()) throw ConfigError("config: 'dataset.classes' must be an array");
      c.dataset.classes.clear();
      for (const auto& a : d["classes"]) {
        only_keys(a, "dataset.classes[]", {"label", "amplitude_m", "frequency_hz", "sway_ratio"});
        GestureArchetype arch;
        read_key(a, "label", arch.label, "dataset.classes[]");
        read_key(a, "amplitude_m", arch.amplitude_m, "dataset.classes[]");
        read_key(a, "frequency_hz", arch.frequency_hz, "dataset.classes[]");
        read_key(a, "sway_ratio", arch.sway_ratio, "dataset.classes[]");
        if (arch.label.empty()) throw ConfigError("config: every dataset class needs a label");
        c.dataset.classes.push_back(arch);
      }
    }
  }
  if (j.contains("filter")) {
    const auto& f = j["filter"];
    only_keys(f, "filter", {"cutoff_hz", "sample_rate", "order", "zero_phase"});
    read_key(f, "cutoff_hz", c.filter.cutoff_hz, "filter");
    read_key(f, "sample_rate", c.filter.sample_rate, "filter");
    read_key(f, "order", c.filter.order, "filter");
    read_key(f, "zero_phase", c.filter.zero_phase, "filter");
  }
  if (j.contains("features")) {
    const auto& f = j["features"];
    only_keys(f, "features", {"entropy_bins", "aggregation"});
    read_key(f, "entropy_bins", c.features.entropy_bins, "features");
    std::string agg(to_string(c.features.aggregation));
    read_key(f, "aggregation", agg, "features");
    try {
      c.features.aggregation = parse_aggregation(agg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  if (j.contains("classifier")) {
    const auto& k = j["classifier"];
    only_keys(k, "classifier", {"kind", "k"});
    std::string kind(to_string(c.classifier.kind));
    read_key(k, "kind", kind, "classifier");
    read_key(k, "k", c.classifier.k, "classifier");
    try {
      c.classifier.kind = parse_classifier_kind(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  if (j.contains("evaluation")) {
    const auto& e = j["evaluation"];
    only_keys(e, "evaluation", {"protocols", "train_fraction", "group_by"});
    if (e.contains("protocols")) {
      std::vector<std::string> names;
      read_key(e, "protocols", names, "evaluation");
      c.protocols.clear();
      try {
        for (const auto& n : names) c.protocols.push_back(parse_protocol(n));
      } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("config: ") + err.what());
      }
    }
    read_key(e, "train_fraction", c.train_fraction, "evaluation");
    read_key(e, "group_by", c.group_by, "evaluation");
  }
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    only_keys(p, "paths", {"dataset_dir", "output_dir", "write_traces"});
    read_key(p, "dataset_dir", c.dataset_dir, "paths");
    read_key(p, "output_dir", c.output_dir, "paths");
    read_key(p, "write_traces", c.write_traces, "paths");
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& a : c.dataset.classes) {
    classes.push_back(
        {{"label", a.label}, {"amplitude_m", a.amplitude_m}, {"frequency_hz", a.frequency_hz}, {"sway_ratio", a.sway_ratio}});
  }
  std::vector<std::string> protocols;
  for (auto p : c.protocols) protocols.emplace_back(to_string(p));
  return {
      {"seed", c.seed},
      {"geometry", {{"wavelength", c.wavelength}, {"separation", c.separation}, {"n_max", c.n_max}}},
      {"simulation",
       {{"center_frequency", c.center_frequency},
        {"n_subcarriers", c.n_subcarriers},
        {"subcarrier_spacing", c.subcarrier_spacing},
        {"los_amplitude", c.los_amplitude},
        {"reflection_coefficient", c.reflection_coefficient},
        {"noise_std", c.noise_std}}},
      {"dataset",
       {{"n_subjects", c.dataset.n_subjects},
        {"reps_per_class", c.dataset.reps_per_class},
        {"subject_variation", c.dataset.subject_variation},
        {"repetition_variation", c.dataset.repetition_variation},
        {"duration_s", c.dataset.duration_s},
        {"sample_rate", c.dataset.sample_rate},
        {"placement_offset", c.dataset.placement_offset},
        {"classes", classes}}},
      {"filter",
       {{"cutoff_hz", c.filter.cutoff_hz},
        {"sample_rate", c.filter.sample_rate},
        {"order", c.filter.order},
        {"zero_phase", c.filter.zero_phase}}},
      {"features", {{"entropy_bins", c.features.entropy_bins}, {"aggregation", to_string(c.features.aggregation)}}},
      {"classifier", {{"kind", to_string(c.classifier.kind)}, {"k", c.classifier.k}}},
      {"evaluation", {{"protocols", protocols}, {"train_fraction", c.train_fraction}, {"group_by", c.group_by}}},
      {"paths", {{"dataset_dir", c.dataset_dir}, {"output_dir", c.output_dir}, {"write_traces", c.write_traces}}},
  };
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace csisense
