#pragma once

// Evaluation protocols over a labelled feature dataset: inset (train = test),
// stratified ten-fold cross-validation, person-dependent split,
// person-independent leave-one-subject-out, and attribute-grouped runs.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csisense/classify.hpp"

namespace csisense {

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> classes)
      : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {}

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t n_classes() const { return classes_.size(); }

  std::uint64_t count(std::size_t truth, std::size_t predicted) const {
    return counts_.at(truth * classes_.size() + predicted);
  }

  void add(std::size_t truth, std::size_t predicted, std::uint64_t n = 1) {
    counts_.at(truth * classes_.size() + predicted) += n;
  }

  void add(const std::string& truth, const std::string& predicted) { add(index_of(truth), index_of(predicted)); }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(classes_.begin(), classes_.end(), label);
    if (it == classes_.end()) throw std::invalid_argument("ConfusionMatrix: unknown class '" + label + "'");
    return static_cast<std::size_t>(it - classes_.begin());
  }

  std::uint64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

  std::uint64_t correct() const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < classes_.size(); ++i) s += count(i, i);
    return s;
  }

  std::uint64_t row_total(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < classes_.size(); ++j) s += count(truth, j);
    return s;
  }

  /// Percentage of row `truth` predicted as `predicted`; 0 for empty rows.
  double row_percent(std::size_t truth, std::size_t predicted) const {
    const auto r = row_total(truth);
    return r == 0 ? 0.0 : 100.0 * static_cast<double>(count(truth, predicted)) / static_cast<double>(r);
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) throw std::invalid_argument("ConfusionMatrix: class sets differ");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::uint64_t> counts_;
};

/// Diagonal over total.
inline double accuracy(const ConfusionMatrix& m) {
  const auto total = m.total();
  if (total == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
  return static_cast<double>(m.correct()) / static_cast<double>(total);
}

enum class Protocol { kInset, kTenFold, kPersonDependent, kPersonIndependent };

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kInset: return "inset";
    case Protocol::kTenFold: return "ten_fold";
    case Protocol::kPersonDependent: return "person_dependent";
    case Protocol::kPersonIndependent: return "person_independent";
  }
  return "?";
}

inline Protocol parse_protocol(std::string_view s) {
  if (s == "inset") return Protocol::kInset;
  if (s == "ten_fold" || s == "tenfold" || s == "cv") return Protocol::kTenFold;
  if (s == "person_dependent") return Protocol::kPersonDependent;
  if (s == "person_independent" || s == "loso") return Protocol::kPersonIndependent;
  throw std::invalid_argument("unknown protocol '" + std::string(s) + "'");
}

struct ProtocolSpec {
  Protocol protocol = Protocol::kTenFold;
  double train_fraction = 0.5;  // person-dependent only
  std::uint64_t seed = 0;
};

struct GroupReport;

struct EvalReport {
  std::string protocol;
  std::string classifier;
  ConfusionMatrix matrix;
  double overall_accuracy = 0.0;
  /// Person-independent runs: accuracy on each held-out subject.
  std::vector<std::pair<std::string, double>> per_subject;
  /// Grouped runs: one report per attribute value, in sorted value order.
  std::string group_attribute;
  std::vector<GroupReport> per_group;
};

struct GroupReport {
  std::string value;
  EvalReport report;
};

namespace detail {

inline EvalReport make_report(Protocol p, const ClassifierSpec& spec, ConfusionMatrix m) {
  EvalReport r;
  r.protocol = std::string(to_string(p));
  r.classifier = spec.describe();
  r.overall_accuracy = accuracy(m);
  r.matrix = std::move(m);
  return r;
}

inline void test_into(const TrainedModel& model, const LabeledDataset& data,
                      std::span<const std::size_t> test, ConfusionMatrix& m) {
  for (std::size_t i : test) {
    const auto& s = data[i];
    m.add(m.index_of(s.label), m.index_of(model.predict(s.features)));
  }
}

inline std::vector<std::size_t> indices_by_label(const LabeledDataset& data, std::span<const std::size_t> pool,
                                                 const std::string& label) {
  std::vector<std::size_t> out;
  for (std::size_t i : pool) {
    if (data[i].label == label) out.push_back(i);
  }
  return out;
}

}  // namespace detail

/// Stratified fold assignment: each class's samples are shuffled with the
/// seeded generator and dealt round-robin, continuing the rotation from
/// one class to the next. Returns fold[i] for every sample.
inline std::vector<std::size_t> stratified_folds(const LabeledDataset& data, std::size_t n_folds,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> fold(data.size(), 0);
  std::mt19937_64 rng(seed);
  const auto pool = all_indices(data);
  std::size_t next = 0;
  for (const auto& label : data.classes()) {
    auto members = detail::indices_by_label(data, pool, label);
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) fold[i] = next++ % n_folds;
  }
  return fold;
}

inline EvalReport inset_eval(const LabeledDataset& data, const ClassifierSpec& spec) {
  if (data.empty()) throw std::invalid_argument("inset_eval: empty dataset");
  const auto idx = all_indices(data);
  const auto model = fit(spec, data, idx);
  ConfusionMatrix m(data.classes());
  detail::test_into(model, data, idx, m);
  return detail::make_report(Protocol::kInset, spec, std::move(m));
}

inline EvalReport ten_fold_cv(const LabeledDataset& data, const ClassifierSpec& spec, std::uint64_t seed) {
  constexpr std::size_t kFolds = 10;
  if (data.size() < kFolds) throw std::invalid_argument("ten_fold_cv: need at least 10 samples");
  const auto classes = data.classes();
  for (const auto& c : classes) {
    if (detail::indices_by_label(data, all_indices(data), c).size() < 2) {
      throw std::invalid_argument("ten_fold_cv: class '" + c + "' must appear in at least two folds");
    }
  }
  const auto fold = stratified_folds(data, kFolds, seed);
  ConfusionMatrix m(classes);
  for (std::size_t f = 0; f < kFolds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < data.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    if (test.empty()) continue;
    const auto model = fit(spec, data, train);
    detail::test_into(model, data, test, m);
  }
  return detail::make_report(Protocol::kTenFold, spec, std::move(m));
}

/// Per subject and class, a seeded shuffle puts round(fraction * count)
/// samples (at least one) into training and the rest into testing. With
/// fraction 1 there is nothing held out and the training set is tested.
inline EvalReport person_dependent_eval(const LabeledDataset& data, const ClassifierSpec& spec,
                                        double train_fraction, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("person_dependent_eval: empty dataset");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("person_dependent_eval: train fraction must lie in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train, test;
  const auto pool = all_indices(data);
  for (const auto& subject : data.subjects()) {
    std::vector<std::size_t> mine;
    for (std::size_t i : pool) {
      if (data[i].subject_id == subject) mine.push_back(i);
    }
    for (const auto& label : data.classes()) {
      auto members = detail::indices_by_label(data, mine, label);
      if (members.empty()) continue;
      std::shuffle(members.begin(), members.end(), rng);
      auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
      n_train = std::clamp<std::size_t>(n_train, 1, members.size());
      train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
      test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  if (test.empty()) test = train;
  const auto model = fit(spec, data, train);
  ConfusionMatrix m(data.classes());
  detail::test_into(model, data, test, m);
  return detail::make_report(Protocol::kPersonDependent, spec, std::move(m));
}

/// Leave-one-subject-out. The matrix pools every held-out prediction; the
/// overall accuracy is the mean of the per-subject accuracies.
inline EvalReport person_independent_eval(const LabeledDataset& data, const ClassifierSpec& spec) {
  const auto subjects = data.subjects();
  if (subjects.size() < 2) throw std::invalid_argument("person_independent_eval: need at least two subjects");
  ConfusionMatrix pooled(data.classes());
  std::vector<std::pair<std::string, double>> per_subject;
  for (const auto& subject : subjects) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < data.size(); ++i) (data[i].subject_id == subject ? test : train).push_back(i);
    const auto model = fit(spec, data, train);
    ConfusionMatrix m(data.classes());
    detail::test_into(model, data, test, m);
    per_subject.emplace_back(subject, accuracy(m));
    pooled += m;
  }
  auto report = detail::make_report(Protocol::kPersonIndependent, spec, std::move(pooled));
  double sum = 0.0;
  for (const auto& [_, acc] : per_subject) sum += acc;
  report.overall_accuracy = sum / static_cast<double>(per_subject.size());
  report.per_subject = std::move(per_subject);
  return report;
}

inline EvalReport run_protocol(const LabeledDataset& data, const ClassifierSpec& spec, const ProtocolSpec& p) {
  switch (p.protocol) {
    case Protocol::kInset: return inset_eval(data, spec);
    case Protocol::kTenFold: return ten_fold_cv(data, spec, p.seed);
    case Protocol::kPersonDependent: return person_dependent_eval(data, spec, p.train_fraction, p.seed);
    case Protocol::kPersonIndependent: return person_independent_eval(data, spec);
  }
  throw std::invalid_argument("run_protocol: unknown protocol");
}

/// Runs the protocol separately inside each partition of the attribute.
/// The top-level matrix sums the group matrices; its accuracy is pooled.
inline EvalReport grouped_eval(const LabeledDataset& data, const ClassifierSpec& spec,
                               const std::string& attribute, const ProtocolSpec& p) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto it = data[i].attributes.find(attribute);
    if (it == data[i].attributes.end()) {
      throw std::invalid_argument("grouped_eval: sample without attribute '" + attribute + "'");
    }
    groups[it->second].push_back(i);
  }
  if (groups.empty()) throw std::invalid_argument("grouped_eval: empty dataset");
  ConfusionMatrix pooled(data.classes());
  EvalReport out;
  for (const auto& [value, idx] : groups) {
    const auto part = data.subset(idx);
    auto r = run_protocol(part, spec, p);
    // Groups may lack a class; re-map onto the full class list.
    ConfusionMatrix widened(data.classes());
    for (std::size_t i = 0; i < r.matrix.n_classes(); ++i) {
      for (std::size_t j = 0; j < r.matrix.n_classes(); ++j) {
        widened.add(widened.index_of(r.matrix.classes()[i]), widened.index_of(r.matrix.classes()[j]),
                    r.matrix.count(i, j));
      }
    }
    pooled += widened;
    out.per_group.push_back({value, std::move(r)});
  }
  auto head = detail::make_report(p.protocol, spec, std::move(pooled));
  head.group_attribute = attribute;
  head.per_group = std::move(out.per_group);
  return head;
}

// ---------------------------------------------------------------------------
// Report output

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

/// Aligned table: rows are true classes, columns predicted classes, cells
/// row percentages with two decimals, followed by the overall accuracy.
inline void write_report_text(const EvalReport& r, std::ostream& out, const std::string& title_suffix = {}) {
  using detail::fixed;
  using detail::pad_left;
  using detail::pad_right;
  const auto& m = r.matrix;
  std::size_t label_w = std::string("true\\pred").size();
  std::size_t cell_w = 8;
  for (const auto& c : m.classes()) {
    label_w = std::max(label_w, c.size());
    cell_w = std::max(cell_w, c.size() + 3);
  }
  out << "protocol: " << r.protocol << title_suffix << "  classifier: " << r.classifier << '\n';
  out << pad_right("true\\pred", label_w);
  for (const auto& c : m.classes()) out << pad_left(c + "(%)", cell_w + 1);
  out << pad_left("n", 8) << '\n';
  for (std::size_t i = 0; i < m.n_classes(); ++i) {
    out << pad_right(m.classes()[i], label_w);
    for (std::size_t j = 0; j < m.n_classes(); ++j) out << pad_left(fixed(m.row_percent(i, j), 2), cell_w + 1);
    out << pad_left(std::to_string(m.row_total(i)), 8) << '\n';
  }
  out << "overall accuracy: " << fixed(100.0 * r.overall_accuracy, 2) << "%\n";
  if (!r.per_subject.empty()) {
    out << "per-subject accuracy:";
    for (const auto& [s, a] : r.per_subject) out << ' ' << s << '=' << fixed(100.0 * a, 2) << '%';
    out << '\n';
  }
  for (const auto& g : r.per_group) {
    out << '\n';
    write_report_text(g.report, out, " [" + r.group_attribute + "=" + g.value + "]");
  }
}

/// Machine-readable rows, tab-separated:
///   protocol group true predicted count row_percent   one per matrix cell
///   protocol group * * total overall_accuracy          summary
///   protocol group subject=<id> * - accuracy           person-independent only
inline void write_report_rows(const EvalReport& r, std::ostream& out, bool header = true,
                              const std::string& group = "all") {
  if (header) out << "protocol\tgroup\ttrue\tpredicted\tcount\tvalue\n";
  const auto& m = r.matrix;
  for (std::size_t i = 0; i < m.n_classes(); ++i) {
    for (std::size_t j = 0; j < m.n_classes(); ++j) {
      out << r.protocol << '\t' << group << '\t' << m.classes()[i] << '\t' << m.classes()[j] << '\t'
          << m.count(i, j) << '\t' << detail::fixed(m.row_percent(i, j), 4) << '\n';
    }
  }
  out << r.protocol << '\t' << group << "\t*\t*\t" << m.total() << '\t' << detail::fixed(r.overall_accuracy, 6)
      << '\n';
  for (const auto& [s, a] : r.per_subject) {
    out << r.protocol << '\t' << group << "\tsubject=" << s << "\t*\t-\t" << detail::fixed(a, 6) << '\n';
  }
  for (const auto& g : r.per_group) write_report_rows(g.report, out, false, r.group_attribute + "=" + g.value);
}

}  // namespace csisense
