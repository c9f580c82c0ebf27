#pragma once

// Flat-file dataset store:
//
//   <root>/manifest.tsv   "# csisense-manifest/1" then
//                         trace_id  file  subject  label  attributes
//   <root>/traces/*.trace portable text traces
//   <root>/features.tsv   "# csisense-features/1 config_hash=<hex>" then a
//                         header row and one row of feature values per trace
//
// Attributes are "key=value" pairs joined by ';', percent-escaped.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csisense/classify.hpp"
#include "csisense/detail/text.hpp"
#include "csisense/ingest.hpp"

namespace csisense {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string trace_id;
  std::string file;  // relative to the store root
  std::string subject;
  std::string label;
  std::map<std::string, std::string> attributes;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline constexpr std::string_view kManifestMagic = "# csisense-manifest/1";
inline constexpr std::string_view kFeaturesMagic = "# csisense-features/1";

namespace detail {

inline std::string encode_attributes(const std::map<std::string, std::string>& attrs) {
  std::string out;
  for (const auto& [k, v] : attrs) {
    if (!out.empty()) out += ';';
    out += escape_token(k) + "=" + escape_token(v);
  }
  return out.empty() ? "-" : out;
}

inline std::optional<std::map<std::string, std::string>> decode_attributes(std::string_view s) {
  std::map<std::string, std::string> out;
  if (s == "-" || s.empty()) return out;
  for (auto part : split(s, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    auto k = unescape_token(part.substr(0, eq));
    auto v = unescape_token(part.substr(eq + 1));
    if (!k || !v || k->empty()) return std::nullopt;
    out[*k] = *v;
  }
  return out;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

class DatasetStore {
 public:
  /// Creates (or empties the manifest of) a store rooted at `root`.
  static DatasetStore create(const std::filesystem::path& root) {
    std::filesystem::create_directories(root / "traces");
    DatasetStore s(root);
    std::filesystem::remove(root / "features.tsv");
    return s;
  }

  /// Opens an existing store; fails on a missing or corrupt manifest or on
  /// rows that reference missing trace files.
  static DatasetStore open(const std::filesystem::path& root) {
    DatasetStore s(root);
    std::ifstream in(s.manifest_path());
    if (!in) throw StoreError("store: no manifest at " + s.manifest_path().string());
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != kManifestMagic) {
      throw StoreError("store: manifest line 1: missing magic header");
    }
    ++line_no;
    if (!std::getline(in, line) || line != "trace_id\tfile\tsubject\tlabel\tattributes") {
      throw StoreError("store: manifest line 2: bad column header");
    }
    std::map<std::string, bool> seen;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto cols = detail::split(line, '\t');
      auto bad = [&](const std::string& why) {
        return StoreError("store: manifest line " + std::to_string(line_no) + ": " + why);
      };
      if (cols.size() != 5) throw bad("expected 5 columns");
      ManifestEntry e;
      auto id = detail::unescape_token(cols[0]);
      auto file = detail::unescape_token(cols[1]);
      auto subject = detail::unescape_token(cols[2]);
      auto label = detail::unescape_token(cols[3]);
      auto attrs = detail::decode_attributes(cols[4]);
      if (!id || !file || !subject || !label || !attrs || id->empty() || file->empty()) throw bad("malformed row");
      e.trace_id = *id;
      e.file = *file;
      e.subject = *subject;
      e.label = *label;
      e.attributes = std::move(*attrs);
      if (seen[e.trace_id]) throw bad("duplicate trace id '" + e.trace_id + "'");
      seen[e.trace_id] = true;
      if (!std::filesystem::exists(root / e.file)) throw bad("missing trace file '" + e.file + "'");
      s.entries_.push_back(std::move(e));
    }
    return s;
  }

  const std::filesystem::path& root() const { return root_; }
  const std::vector<ManifestEntry>& entries() const { return entries_; }
  std::filesystem::path manifest_path() const { return root_ / "manifest.tsv"; }
  std::filesystem::path features_path() const { return root_ / "features.tsv"; }

  /// Writes the trace under traces/<id>.trace and records it. Metadata in
  /// the manifest is taken from the trace.
  void add(const std::string& trace_id, const Trace& trace) {
    ManifestEntry e;
    e.trace_id = trace_id;
    e.file = "traces/" + trace_id + ".trace";
    e.subject = trace.metadata().subject_id;
    e.label = trace.metadata().label;
    e.attributes = trace.metadata().attributes;
    write_trace(trace, (root_ / e.file).string());
    entries_.push_back(std::move(e));
  }

  /// Records a manifest row without writing a trace file.
  void add_entry(ManifestEntry e) { entries_.push_back(std::move(e)); }

  Trace load(const ManifestEntry& e) const {
    auto t = read_trace((root_ / e.file).string());
    auto& md = t.metadata();
    md.subject_id = e.subject;
    md.label = e.label;
    md.attributes = e.attributes;
    return t;
  }

  void save_manifest() const {
    std::ofstream out(manifest_path(), std::ios::binary);
    if (!out) throw StoreError("store: cannot write " + manifest_path().string());
    out << kManifestMagic << '\n' << "trace_id\tfile\tsubject\tlabel\tattributes\n";
    for (const auto& e : entries_) {
      out << detail::escape_token(e.trace_id) << '\t' << detail::escape_token(e.file) << '\t'
          << detail::escape_token(e.subject) << '\t' << detail::escape_token(e.label) << '\t'
          << detail::encode_attributes(e.attributes) << '\n';
    }
    if (!out) throw StoreError("store: write failed for " + manifest_path().string());
  }

  /// Writes the feature cache; sample i belongs to manifest entry i.
  void save_features(std::uint64_t config_hash, const LabeledDataset& data) const {
    if (data.size() != entries_.size()) throw StoreError("store: feature rows do not match the manifest");
    std::ofstream out(features_path(), std::ios::binary);
    if (!out) throw StoreError("store: cannot write " + features_path().string());
    out << kFeaturesMagic << " config_hash=" << detail::hex64(config_hash) << '\n' << "trace_id";
    for (const auto& name : data.layout()) out << '\t' << detail::escape_token(name);
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
      out << detail::escape_token(entries_[i].trace_id);
      for (double v : data[i].features) out << '\t' << detail::format_double(v);
      out << '\n';
    }
    if (!out) throw StoreError("store: write failed for " + features_path().string());
  }

  /// Cached features, or nullopt when the cache is absent, was computed
  /// under a different configuration, or no longer matches the manifest.
  std::optional<LabeledDataset> load_features(std::uint64_t config_hash) const {
    std::ifstream in(features_path());
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    if (line != std::string(kFeaturesMagic) + " config_hash=" + detail::hex64(config_hash)) return std::nullopt;
    if (!std::getline(in, line)) return std::nullopt;
    auto head = detail::split(line, '\t');
    if (head.empty() || head[0] != "trace_id") return std::nullopt;
    std::vector<std::string> layout;
    for (std::size_t i = 1; i < head.size(); ++i) {
      auto n = detail::unescape_token(head[i]);
      if (!n) return std::nullopt;
      layout.push_back(*n);
    }
    LabeledDataset data(layout);
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cols = detail::split(line, '\t');
      if (row >= entries_.size() || cols.size() != layout.size() + 1) return std::nullopt;
      const auto& e = entries_[row];
      auto id = detail::unescape_token(cols[0]);
      if (!id || *id != e.trace_id) return std::nullopt;
      Sample s{{}, e.label, e.subject, e.attributes};
      for (std::size_t i = 1; i < cols.size(); ++i) {
        auto v = detail::parse_double(cols[i]);
        if (!v) return std::nullopt;
        s.features.push_back(*v);
      }
      data.add(std::move(s));
      ++row;
    }
    if (row != entries_.size()) return std::nullopt;
    return data;
  }

 private:
  explicit DatasetStore(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path root_;
  std::vector<ManifestEntry> entries_;
};

}  // namespace csisense
