#pragma once

// End-to-end orchestration used by the command-line tool:
// simulate or load traces -> preprocess -> features -> evaluate -> reports.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "csisense/config.hpp"
#include "csisense/eval.hpp"
#include "csisense/features.hpp"
#include "csisense/preprocess.hpp"
#include "csisense/sim.hpp"
#include "csisense/store.hpp"

namespace csisense {

inline FeatureVector trace_features(const Trace& trace, const PipelineConfig& config) {
  return extract_trace_features(preprocess_trace(trace, config.filter), config.features);
}

inline std::string trace_id_for(const Trace& t) {
  return t.metadata().subject_id + "_" + t.metadata().label + "_" + t.metadata().session;
}

/// Simulates the configured dataset and extracts features without keeping
/// the raw traces in memory.
inline LabeledDataset simulate_features(const PipelineConfig& config) {
  LabeledDataset data;
  for_each_gesture_trace(config.sim_config(), config.dataset, [&](Trace&& t) {
    const auto& md = t.metadata();
    data.add(trace_features(t, config), md.label, md.subject_id, md.attributes);
  });
  return data;
}

/// Writes every simulated trace and the manifest into a new store.
inline DatasetStore simulate_to_store(const PipelineConfig& config, const std::filesystem::path& root) {
  auto store = DatasetStore::create(root);
  for_each_gesture_trace(config.sim_config(), config.dataset,
                         [&](Trace&& t) { store.add(trace_id_for(t), t); });
  store.save_manifest();
  return store;
}

struct FeatureRun {
  LabeledDataset data;
  bool from_cache = false;
};

/// Features for every manifest row, reusing the cache when its config hash
/// matches and rebuilding (and rewriting) it otherwise.
inline FeatureRun store_features(const DatasetStore& store, const PipelineConfig& config, bool use_cache = true) {
  const auto hash = config.feature_hash();
  if (use_cache) {
    if (auto cached = store.load_features(hash)) return {std::move(*cached), true};
  }
  LabeledDataset data;
  for (const auto& e : store.entries()) {
    const auto t = store.load(e);
    data.add(trace_features(t, config), e.label, e.subject, e.attributes);
  }
  store.save_features(hash, data);
  return {std::move(data), false};
}

/// One report per configured protocol; with a grouping attribute set, each
/// protocol's report also carries the per-group breakdown.
inline std::vector<EvalReport> evaluate_dataset(const LabeledDataset& data, const PipelineConfig& config) {
  std::vector<EvalReport> out;
  for (auto p : config.protocols) {
    if (config.group_by.empty()) {
      out.push_back(run_protocol(data, config.classifier, config.protocol_spec(p)));
    } else {
      auto overall = run_protocol(data, config.classifier, config.protocol_spec(p));
      auto grouped = grouped_eval(data, config.classifier, config.group_by, config.protocol_spec(p));
      overall.group_attribute = grouped.group_attribute;
      overall.per_group = std::move(grouped.per_group);
      out.push_back(std::move(overall));
    }
  }
  return out;
}

inline std::string render_reports_text(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i > 0) out << "\n";
    write_report_text(reports[i], out);
  }
  return out.str();
}

inline std::string render_reports_rows(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  for (std::size_t i = 0; i < reports.size(); ++i) write_report_rows(reports[i], out, i == 0);
  return out.str();
}

/// Writes report.txt and report.tsv into `dir`.
inline void write_reports(const std::vector<EvalReport>& reports, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + p.string());
  };
  put(dir / "report.txt", render_reports_text(reports));
  put(dir / "report.tsv", render_reports_rows(reports));
}

}  // namespace csisense
