#pragma once

#include "semisup/classify.hpp"
#include "semisup/eval.hpp"
#include "semisup/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semisup {

/// Either a CSV file or a named generator.
struct DatasetSource {
  std::optional<std::filesystem::path> csv;
  CsvOptions csv_options;
  std::string generator = "imbalanced";  // imbalanced | four-gauss
  ImbalancedConfig imbalanced;
  Index per_class = 100;                 // four-gauss
  std::uint64_t seed = 0;
};

Dataset load_source(const DatasetSource& src);

enum class SplitKind { Holdout, Period };

struct SplitPolicy {
  SplitKind kind = SplitKind::Holdout;
  double holdout = 0.3;                 // evaluation fraction
  std::string period_column;
  std::optional<double> evaluate_period; // default: the largest period
};

enum class ClassWeightPolicy { None, Balanced };

struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<StrategySpec> strategies;
  std::vector<ClassifierSpec> classifiers;
  std::vector<std::uint64_t> seeds;
  ClassWeightPolicy class_weights = ClassWeightPolicy::Balanced;
  SplitPolicy split;
  std::optional<int> positive_class;     // default: least frequent class
  std::optional<std::filesystem::path> out_dir;

  void validate() const;
};

/// JSON keys: dataset, strategies, classifiers, seeds, class_weights, split,
/// positive_class, out. Relative paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct CellResult {
  std::string strategy;
  std::string classifier;
  std::uint64_t seed = 0;
  MetricReport train;
  MetricReport test;
  std::optional<double> auc;
  Index train_size = 0;
  Index test_size = 0;
  Index minority_added = 0;
  double sampling_seconds = 0.0;
  double training_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct ExperimentReport {
  std::vector<CellResult> cells;
  std::string dataset_name;
  int positive_class = 1;
  Index samples = 0;
  /// Evaluation rows found inside a training plan, per cell ("strategy/classifier/seed: n").
  std::vector<std::string> leakage;
  std::map<std::string, std::string> plans;  // plan_<strategy>_<seed>.csv -> body
};

/// Full strategy x classifier x seed grid. Failing cells are recorded with
/// their error text and the run continues.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// One row per cell; seconds columns last. `with_times = false` drops them.
std::string cells_to_csv(const ExperimentReport& r, bool with_times = true);
/// Per-strategy and per-classifier means of the test metrics over succeeded cells.
std::string summary_json(const ExperimentReport& r, bool with_times = true);
void write_report(const ExperimentReport& r, const std::filesystem::path& dir);

}  // namespace semisup
