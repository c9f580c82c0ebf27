// csisense: command-line front end for the CSI gesture sensing pipeline.
//
//   csisense plan      --wavelength 0.06 --separation 1.2 --n-max 8
//   csisense simulate  --config cfg.json --out data/
//   csisense parse     capture.dat --out capture.trace [--strict]
//   csisense features  --dataset data/ --config cfg.json
//   csisense evaluate  --dataset data/ --config cfg.json --out reports/
//   csisense pipeline  --config cfg.json --out reports/
//   csisense train     --dataset data/ --config cfg.json --out model.txt
//   csisense predict   --model model.txt --config cfg.json trace...
//
// Exit codes: 0 success, 2 usage or input errors, 1 anything else.
// CSISENSE_CONFIG supplies the config path when --config is omitted.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csisense/classify.hpp"
#include "csisense/config.hpp"
#include "csisense/fresnel.hpp"
#include "csisense/ingest.hpp"
#include "csisense/pipeline.hpp"
#include "csisense/store.hpp"

namespace {

using namespace csisense;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Input the user can fix: bad flags, missing files, corrupt data.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("cannot open " + path);
}

PipelineConfig resolve_config(const CommonOptions& opts) {
  std::string path = opts.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("CSISENSE_CONFIG")) path = env;
  }
  if (path.empty()) throw UsageError("no config given (use --config or set CSISENSE_CONFIG)");
  auto config = load_config(path);
  if (opts.seed) config.seed = *opts.seed;
  return config;
}

int cmd_plan(double wavelength, double separation, std::size_t n_max, std::optional<double> target,
             const std::string& format, const std::string& out_path) {
  if (!(wavelength > 0.0)) throw UsageError("--wavelength must be positive");
  if (!(separation > 0.0)) throw UsageError("--separation must be positive");
  if (format != "text" && format != "tsv") throw UsageError("--format must be 'text' or 'tsv'");
  const auto table = build_lookup_table(wavelength, separation, n_max);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw UsageError("cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  if (format == "tsv") {
    table.write_rows(out);
  } else {
    table.write_text(out);
  }
  if (target) {
    if (!(*target >= 0.0)) throw UsageError("--target must be non-negative");
    const auto zone = table.containing_zone(*target);
    const auto rec = recommend_odd_zone(*target, wavelength, separation, std::max<std::size_t>(n_max, 1));
    std::cerr << "target " << *target << " m: ";
    if (zone) {
      std::cerr << "inside zone " << *zone;
    } else {
      std::cerr << "beyond zone " << table.n_max();
    }
    std::cerr << "; nearest odd boundary n=" << rec.n_odd << " at " << rec.boundary_distance << " m";
    if (rec.beyond_range) std::cerr << " (warning: target lies beyond the table range)";
    std::cerr << '\n';
  }
  return 0;
}

int cmd_simulate(const CommonOptions& opts) {
  auto config = resolve_config(opts);
  const std::string dir = !opts.out.empty() ? opts.out : config.dataset_dir;
  if (dir.empty()) throw UsageError("no output directory (use --out or paths.dataset_dir)");
  const auto store = simulate_to_store(config, dir);
  std::cerr << "wrote " << store.entries().size() << " traces to " << dir << '\n';
  return 0;
}

int cmd_parse(const std::string& log_path, const std::string& out_path, bool strict, double rate,
              const TraceMetadata& md) {
  if (out_path.empty()) throw UsageError("--out is required");
  require_file(log_path);
  LogParseResult result;
  try {
    result = read_log_file(log_path, LogParseOptions{strict, rate});
  } catch (const ParseError& e) {
    throw UsageError(log_path + ": " + e.what() + " at byte " + std::to_string(e.location()));
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  result.trace.metadata() = md;
  write_trace(result.trace, out_path);
  std::cerr << "decoded " << result.trace.size() << " frames (" << result.skipped_records << " skipped)\n";
  return 0;
}

DatasetStore open_store(const std::string& dir, const PipelineConfig& config) {
  const std::string root = !dir.empty() ? dir : config.dataset_dir;
  if (root.empty()) throw UsageError("no dataset directory (use --dataset or paths.dataset_dir)");
  return DatasetStore::open(root);
}

int cmd_features(const CommonOptions& opts, const std::string& dataset_dir, bool rebuild) {
  const auto config = resolve_config(opts);
  const auto store = open_store(dataset_dir, config);
  const auto run = store_features(store, config, !rebuild);
  std::cerr << (run.from_cache ? "feature cache is current: " : "computed features for ") << run.data.size()
            << " traces\n";
  return 0;
}

int emit_reports(const std::vector<EvalReport>& reports, const std::string& out_dir) {
  std::cout << render_reports_text(reports);
  if (!out_dir.empty()) write_reports(reports, out_dir);
  return 0;
}

int cmd_evaluate(const CommonOptions& opts, const std::string& dataset_dir) {
  const auto config = resolve_config(opts);
  const auto store = open_store(dataset_dir, config);
  const auto run = store_features(store, config);
  return emit_reports(evaluate_dataset(run.data, config), !opts.out.empty() ? opts.out : config.output_dir);
}

int cmd_pipeline(const CommonOptions& opts) {
  const auto config = resolve_config(opts);
  LabeledDataset data;
  if (!config.dataset_dir.empty() && std::filesystem::exists(std::filesystem::path(config.dataset_dir) / "manifest.tsv")) {
    data = store_features(DatasetStore::open(config.dataset_dir), config).data;
  } else if (config.write_traces && !config.dataset_dir.empty()) {
    const auto store = simulate_to_store(config, config.dataset_dir);
    data = store_features(store, config).data;
  } else {
    data = simulate_features(config);
  }
  return emit_reports(evaluate_dataset(data, config), !opts.out.empty() ? opts.out : config.output_dir);
}

int cmd_train(const CommonOptions& opts, const std::string& dataset_dir) {
  if (opts.out.empty()) throw UsageError("--out is required");
  const auto config = resolve_config(opts);
  const auto store = open_store(dataset_dir, config);
  const auto run = store_features(store, config);
  const auto model = fit(config.classifier, run.data);
  std::ofstream out(opts.out, std::ios::binary);
  if (!out) throw UsageError("cannot write " + opts.out);
  write_model(model, out);
  return 0;
}

int cmd_predict(const CommonOptions& opts, const std::string& model_path, const std::vector<std::string>& traces) {
  const auto config = resolve_config(opts);
  std::ifstream in(model_path);
  if (!in) throw UsageError("cannot open " + model_path);
  const auto model = read_model(in);
  for (const auto& path : traces) require_file(path);
  for (const auto& path : traces) {
    const auto t = read_trace(path);
    std::cout << path << '\t' << model.predict(trace_features(t, config)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSI gesture sensing pipeline"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool with_out, const std::string& out_help) {
    sub->add_option("--config", common.config_path, "Pipeline config (JSON); defaults to $CSISENSE_CONFIG");
    sub->add_option("--seed", common.seed, "Override the config seed");
    if (with_out) sub->add_option("--out", common.out, out_help);
  };

  auto* plan = app.add_subcommand("plan", "Print the Fresnel boundary look-up table");
  double wavelength = 0.06, separation = 1.2;
  std::size_t n_max = 8;
  std::optional<double> target;
  std::string format = "text", plan_out;
  plan->add_option("--wavelength", wavelength, "Carrier wavelength in meters")->capture_default_str();
  plan->add_option("--separation,-l", separation, "Tx-Rx distance in meters")->capture_default_str();
  plan->add_option("--n-max", n_max, "Largest zone index")->capture_default_str();
  plan->add_option("--target", target, "Subject offset from the link midpoint (m) to place");
  plan->add_option("--format", format, "text or tsv")->capture_default_str();
  plan->add_option("--out", plan_out, "Write the table to a file instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic labelled dataset");
  add_common(simulate, true, "Dataset directory");

  auto* parse = app.add_subcommand("parse", "Decode a binary CSI log into a text trace");
  std::string log_path;
  bool strict = false;
  double rate = 100.0;
  TraceMetadata md;
  parse->add_option("log", log_path, "Binary log file")->required();
  parse->add_option("--out", common.out, "Output trace file");
  parse->add_flag("--strict", strict, "Fail on malformed or truncated records");
  parse->add_option("--rate", rate, "Nominal sample rate in Hz")->capture_default_str();
  parse->add_option("--label", md.label, "Class label to record");
  parse->add_option("--subject", md.subject_id, "Subject id to record");
  parse->add_option("--session", md.session, "Session token to record");

  auto* features = app.add_subcommand("features", "Compute or refresh the dataset feature cache");
  std::string dataset_dir;
  bool rebuild = false;
  add_common(features, false, "");
  features->add_option("--dataset", dataset_dir, "Dataset directory");
  features->add_flag("--rebuild", rebuild, "Ignore an existing cache");

  auto* evaluate = app.add_subcommand("evaluate", "Run the configured evaluation protocols");
  add_common(evaluate, true, "Report directory");
  evaluate->add_option("--dataset", dataset_dir, "Dataset directory");

  auto* pipeline = app.add_subcommand("pipeline", "Simulate or load, extract features and evaluate");
  add_common(pipeline, true, "Report directory");

  auto* train = app.add_subcommand("train", "Fit the configured classifier on a dataset");
  add_common(train, true, "Model file");
  train->add_option("--dataset", dataset_dir, "Dataset directory");

  auto* predict = app.add_subcommand("predict", "Classify traces with a saved model");
  std::string model_path;
  std::vector<std::string> traces;
  add_common(predict, false, "");
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("traces", traces, "Trace files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*plan) return cmd_plan(wavelength, separation, n_max, target, format, plan_out);
    if (*simulate) return cmd_simulate(common);
    if (*parse) return cmd_parse(log_path, common.out, strict, rate, md);
    if (*features) return cmd_features(common, dataset_dir, rebuild);
    if (*evaluate) return cmd_evaluate(common, dataset_dir);
    if (*pipeline) return cmd_pipeline(common);
    if (*train) return cmd_train(common, dataset_dir);
    if (*predict) return cmd_predict(common, model_path, traces);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StoreError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << " (at " << e.location() << ")\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
