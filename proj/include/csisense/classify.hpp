#pragma once

// k-nearest-neighbour and Gaussian naive Bayes classifiers over z-scored
// feature vectors, plus a versioned text serialization of trained models.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csisense/detail/text.hpp"
#include "csisense/features.hpp"

namespace csisense {

struct Sample {
  std::vector<double> features;
  std::string label;
  std::string subject_id;
  std::map<std::string, std::string> attributes;
};

class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::vector<std::string> layout) : layout_(std::move(layout)) {}

  void add(Sample sample) {
    if (sample.features.size() != layout_.size()) {
      throw std::invalid_argument("LabeledDataset: feature vector does not match the layout");
    }
    samples_.push_back(std::move(sample));
  }

  void add(const FeatureVector& fv, std::string label, std::string subject,
           std::map<std::string, std::string> attributes = {}) {
    if (samples_.empty() && layout_.empty()) layout_ = fv.layout;
    if (fv.layout != layout_) throw std::invalid_argument("LabeledDataset: feature layout mismatch");
    add(Sample{fv.values, std::move(label), std::move(subject), std::move(attributes)});
  }

  const std::vector<std::string>& layout() const { return layout_; }
  std::size_t dims() const { return layout_.size(); }
  const std::vector<Sample>& samples() const { return samples_; }
  std::vector<Sample>& samples() { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  /// Distinct labels in sorted order.
  std::vector<std::string> classes() const {
    std::vector<std::string> out;
    for (const auto& s : samples_) out.push_back(s.label);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<std::string> subjects() const {
    std::vector<std::string> out;
    for (const auto& s : samples_) out.push_back(s.subject_id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  LabeledDataset subset(std::span<const std::size_t> indices) const {
    LabeledDataset out(layout_);
    out.samples_.reserve(indices.size());
    for (std::size_t i : indices) out.samples_.push_back(samples_.at(i));
    return out;
  }

 private:
  std::vector<std::string> layout_;
  std::vector<Sample> samples_;
};

inline std::vector<std::size_t> all_indices(const LabeledDataset& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

/// Per-dimension z-scoring fitted on training samples only.
struct Standardizer {
  static constexpr double kStdFloor = 1e-12;
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const LabeledDataset& data, std::span<const std::size_t> indices) {
    const std::size_t d = data.dims();
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    const auto n = static_cast<double>(indices.size());
    for (std::size_t i : indices) {
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += data[i].features[j];
    }
    for (double& m : s.mean) m /= n;
    for (std::size_t i : indices) {
      for (std::size_t j = 0; j < d; ++j) {
        const double dev = data[i].features[j] - s.mean[j];
        s.scale[j] += dev * dev;
      }
    }
    for (double& v : s.scale) {
      v = std::sqrt(v / n);
      if (!(v > kStdFloor)) v = 1.0;  // constant dimension
    }
    return s;
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

enum class ClassifierKind { kKnn, kNaiveBayes };

inline std::string_view to_string(ClassifierKind k) { return k == ClassifierKind::kKnn ? "knn" : "naive_bayes"; }

inline ClassifierKind parse_classifier_kind(std::string_view s) {
  if (s == "knn") return ClassifierKind::kKnn;
  if (s == "naive_bayes" || s == "nb") return ClassifierKind::kNaiveBayes;
  throw std::invalid_argument("unknown classifier '" + std::string(s) + "'");
}

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kKnn;
  std::size_t k = 5;

  std::string describe() const {
    return kind == ClassifierKind::kKnn ? "knn(k=" + std::to_string(k) + ")" : "naive_bayes";
  }
};

struct KnnParams {
  std::size_t k = 5;
  std::vector<std::vector<double>> points;  // standardized training vectors
  std::vector<std::size_t> labels;          // index into classes

  friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

struct NaiveBayesParams {
  static constexpr double kVarianceFloor = 1e-9;
  std::vector<double> log_prior;
  std::vector<std::vector<double>> mean;      // [class][dim]
  std::vector<std::vector<double>> variance;  // [class][dim]

  friend bool operator==(const NaiveBayesParams&, const NaiveBayesParams&) = default;
};

class TrainedModel {
 public:
  TrainedModel(std::vector<std::string> layout, std::vector<std::string> classes, Standardizer standardizer,
               std::variant<KnnParams, NaiveBayesParams> params)
      : layout_(std::move(layout)),
        classes_(std::move(classes)),
        standardizer_(std::move(standardizer)),
        params_(std::move(params)) {}

  ClassifierKind kind() const {
    return std::holds_alternative<KnnParams>(params_) ? ClassifierKind::kKnn : ClassifierKind::kNaiveBayes;
  }
  const std::vector<std::string>& layout() const { return layout_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const std::variant<KnnParams, NaiveBayesParams>& params() const { return params_; }

  std::size_t predict_index(std::span<const double> features) const {
    if (features.size() != layout_.size()) {
      throw std::invalid_argument("predict: feature vector does not match the model layout");
    }
    const auto z = standardizer_.apply(features);
    if (const auto* knn = std::get_if<KnnParams>(&params_)) return predict_knn(*knn, z);
    return predict_nb(std::get<NaiveBayesParams>(params_), z);
  }

  const std::string& predict(std::span<const double> features) const {
    return classes_[predict_index(features)];
  }

  const std::string& predict(const FeatureVector& fv) const {
    if (fv.layout != layout_) throw std::invalid_argument("predict: feature layout mismatch");
    return predict(fv.values);
  }

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;

 private:
  // Majority vote among the k nearest; distance ties go to the earlier
  // training sample, vote ties to the class holding the nearest neighbour.
  std::size_t predict_knn(const KnnParams& p, const std::vector<double>& z) const {
    std::vector<std::pair<double, std::size_t>> dist(p.points.size());
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      double d = 0.0;
      const auto& q = p.points[i];
      for (std::size_t j = 0; j < z.size(); ++j) {
        const double e = z[j] - q[j];
        d += e * e;
      }
      dist[i] = {d, i};
    }
    const std::size_t k = std::min(p.k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> votes(classes_.size(), 0);
    for (std::size_t i = 0; i < k; ++i) ++votes[p.labels[dist[i].second]];
    const std::size_t top = *std::max_element(votes.begin(), votes.end());
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t c = p.labels[dist[i].second];
      if (votes[c] == top) return c;
    }
    return p.labels[dist[0].second];
  }

  std::size_t predict_nb(const NaiveBayesParams& p, const std::vector<double>& z) const {
    constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      double score = p.log_prior[c];
      for (std::size_t j = 0; j < z.size(); ++j) {
        const double var = p.variance[c][j];
        const double dev = z[j] - p.mean[c][j];
        score -= 0.5 * (kLog2Pi + std::log(var) + dev * dev / var);
      }
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    return best;
  }

  std::vector<std::string> layout_;
  std::vector<std::string> classes_;
  Standardizer standardizer_;
  std::variant<KnnParams, NaiveBayesParams> params_;
};

namespace detail {

inline std::vector<std::string> classes_of(const LabeledDataset& data, std::span<const std::size_t> idx) {
  std::vector<std::string> out;
  for (std::size_t i : idx) out.push_back(data[i].label);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::size_t class_position(const std::vector<std::string>& classes, const std::string& label) {
  return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
}

}  // namespace detail

inline TrainedModel fit_knn(const LabeledDataset& data, std::span<const std::size_t> indices, std::size_t k = 5) {
  if (indices.empty()) throw std::invalid_argument("fit_knn: empty training set");
  if (k < 1 || k > indices.size()) throw std::invalid_argument("fit_knn: k must lie in [1, |train|]");
  auto scaler = Standardizer::fit(data, indices);
  auto classes = detail::classes_of(data, indices);
  KnnParams p;
  p.k = k;
  p.points.reserve(indices.size());
  p.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    p.points.push_back(scaler.apply(data[i].features));
    p.labels.push_back(detail::class_position(classes, data[i].label));
  }
  return TrainedModel(data.layout(), std::move(classes), std::move(scaler), std::move(p));
}

inline TrainedModel fit_knn(const LabeledDataset& data, std::size_t k = 5) {
  const auto idx = all_indices(data);
  return fit_knn(data, idx, k);
}

inline TrainedModel fit_nb(const LabeledDataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("fit_nb: empty training set");
  auto scaler = Standardizer::fit(data, indices);
  auto classes = detail::classes_of(data, indices);
  const std::size_t d = data.dims();
  const std::size_t c_count = classes.size();
  NaiveBayesParams p;
  p.mean.assign(c_count, std::vector<double>(d, 0.0));
  p.variance.assign(c_count, std::vector<double>(d, 0.0));
  std::vector<std::size_t> counts(c_count, 0);
  std::vector<std::vector<double>> z;
  z.reserve(indices.size());
  std::vector<std::size_t> cls;
  for (std::size_t i : indices) {
    z.push_back(scaler.apply(data[i].features));
    cls.push_back(detail::class_position(classes, data[i].label));
    ++counts[cls.back()];
    for (std::size_t j = 0; j < d; ++j) p.mean[cls.back()][j] += z.back()[j];
  }
  for (std::size_t c = 0; c < c_count; ++c) {
    for (double& m : p.mean[c]) m /= static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = z[i][j] - p.mean[cls[i]][j];
      p.variance[cls[i]][j] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < c_count; ++c) {
    for (double& v : p.variance[c]) {
      v /= static_cast<double>(counts[c]);
      v = std::max(v, NaiveBayesParams::kVarianceFloor);
    }
    p.log_prior.push_back(std::log(static_cast<double>(counts[c]) / static_cast<double>(indices.size())));
  }
  return TrainedModel(data.layout(), std::move(classes), std::move(scaler), std::move(p));
}

inline TrainedModel fit_nb(const LabeledDataset& data) {
  const auto idx = all_indices(data);
  return fit_nb(data, idx);
}

inline TrainedModel fit(const ClassifierSpec& spec, const LabeledDataset& data,
                        std::span<const std::size_t> indices) {
  return spec.kind == ClassifierKind::kKnn ? fit_knn(data, indices, spec.k) : fit_nb(data, indices);
}

inline TrainedModel fit(const ClassifierSpec& spec, const LabeledDataset& data) {
  const auto idx = all_indices(data);
  return fit(spec, data, idx);
}

inline const std::string& predict_knn(const TrainedModel& model, std::span<const double> features) {
  if (model.kind() != ClassifierKind::kKnn) throw std::invalid_argument("predict_knn: not a kNN model");
  return model.predict(features);
}

inline const std::string& predict_nb(const TrainedModel& model, std::span<const double> features) {
  if (model.kind() != ClassifierKind::kNaiveBayes) throw std::invalid_argument("predict_nb: not a naive Bayes model");
  return model.predict(features);
}

// ---------------------------------------------------------------------------
// Text serialization
//
//   csisense-model/1 <knn|naive_bayes>
//   layout <n> <name>...
//   classes <n> <name>...
//   mean <values>            standardizer
//   scale <values>
//   knn: "k <k>" then one "point <class-index> <values>" per training vector
//   nb:  per class "class <index> <log-prior>", "mu <values>", "var <values>"

inline constexpr std::string_view kModelMagic = "csisense-model/1";

inline void write_model(const TrainedModel& model, std::ostream& out) {
  using detail::escape_token;
  using detail::format_double;
  auto row = [&](std::string_view tag, const std::vector<double>& v) {
    out << tag;
    for (double x : v) out << ' ' << format_double(x);
    out << '\n';
  };
  out << kModelMagic << ' ' << to_string(model.kind()) << '\n';
  out << "layout " << model.layout().size();
  for (const auto& s : model.layout()) out << ' ' << escape_token(s);
  out << "\nclasses " << model.classes().size();
  for (const auto& s : model.classes()) out << ' ' << escape_token(s);
  out << '\n';
  row("mean", model.standardizer().mean);
  row("scale", model.standardizer().scale);
  if (const auto* knn = std::get_if<KnnParams>(&model.params())) {
    out << "k " << knn->k << '\n';
    for (std::size_t i = 0; i < knn->points.size(); ++i) {
      row("point " + std::to_string(knn->labels[i]), knn->points[i]);
    }
  } else {
    const auto& nb = std::get<NaiveBayesParams>(model.params());
    for (std::size_t c = 0; c < model.classes().size(); ++c) {
      out << "class " << c << ' ' << format_double(nb.log_prior[c]) << '\n';
      row("mu", nb.mean[c]);
      row("var", nb.variance[c]);
    }
  }
}

inline TrainedModel read_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](std::string_view tag) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("model: unexpected end of input, expected '" + std::string(tag) + "'");
    }
    ++line_no;
    auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens[0] != tag) {
      throw std::runtime_error("model line " + std::to_string(line_no) + ": expected '" + std::string(tag) + "'");
    }
    return std::vector<std::string>(tokens.begin(), tokens.end());
  };
  auto number = [&](const std::string& s) {
    auto v = detail::parse_double(s);
    if (!v) throw std::runtime_error("model line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return *v;
  };
  auto count = [&](const std::string& s) {
    auto v = detail::parse_int<std::size_t>(s);
    if (!v) throw std::runtime_error("model line " + std::to_string(line_no) + ": bad count '" + s + "'");
    return *v;
  };
  auto names = [&](std::string_view tag) {
    auto t = next(tag);
    if (t.size() < 2 || count(t[1]) != t.size() - 2) {
      throw std::runtime_error("model line " + std::to_string(line_no) + ": bad '" + std::string(tag) + "' row");
    }
    std::vector<std::string> out;
    for (std::size_t i = 2; i < t.size(); ++i) {
      auto s = detail::unescape_token(t[i]);
      if (!s) throw std::runtime_error("model: bad escape");
      out.push_back(*s);
    }
    return out;
  };
  auto values = [&](const std::vector<std::string>& t, std::size_t from, std::size_t expect) {
    if (t.size() != from + expect) {
      throw std::runtime_error("model line " + std::to_string(line_no) + ": wrong number of values");
    }
    std::vector<double> out;
    for (std::size_t i = from; i < t.size(); ++i) out.push_back(number(t[i]));
    return out;
  };

  auto head = next(kModelMagic);
  if (head.size() != 2) throw std::runtime_error("model: bad header");
  if (head[1] != "knn" && head[1] != "naive_bayes") throw std::runtime_error("model: unknown kind '" + head[1] + "'");
  const auto kind = parse_classifier_kind(head[1]);
  auto layout = names("layout");
  auto classes = names("classes");
  const std::size_t d = layout.size();
  Standardizer st;
  st.mean = values(next("mean"), 1, d);
  st.scale = values(next("scale"), 1, d);
  if (kind == ClassifierKind::kKnn) {
    KnnParams p;
    auto kt = next("k");
    if (kt.size() != 2) throw std::runtime_error("model: bad k row");
    p.k = count(kt[1]);
    while (std::getline(in, line)) {
      ++line_no;
      auto tokens = detail::split_ws(line);
      if (tokens.empty()) continue;
      std::vector<std::string> t(tokens.begin(), tokens.end());
      if (t[0] != "point" || t.size() < 2) throw std::runtime_error("model: expected 'point' row");
      const auto c = count(t[1]);
      if (c >= classes.size()) throw std::runtime_error("model: class index out of range");
      p.labels.push_back(c);
      p.points.push_back(values(t, 2, d));
    }
    if (p.points.empty() || p.k < 1 || p.k > p.points.size()) throw std::runtime_error("model: inconsistent kNN parameters");
    return TrainedModel(std::move(layout), std::move(classes), std::move(st), std::move(p));
  }
  NaiveBayesParams p;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    auto ct = next("class");
    if (ct.size() != 3 || count(ct[1]) != c) throw std::runtime_error("model: bad class row");
    p.log_prior.push_back(number(ct[2]));
    p.mean.push_back(values(next("mu"), 1, d));
    p.variance.push_back(values(next("var"), 1, d));
  }
  return TrainedModel(std::move(layout), std::move(classes), std::move(st), std::move(p));
}

}  // namespace csisense
