#pragma once

#include "semisup/common.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace semisup {

/// Feature matrix plus optional 1-based class labels and provenance.
///
/// Rows are samples. `labels[i] == std::nullopt` marks sample i as unlabeled;
/// the labeled and unlabeled index sets always partition 0..n-1.
/// `class_names[c - 1]` is the original label string of class id c.
struct Dataset {
  Matrix features;
  LabelVector labels;
  int class_count = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> sample_ids;
  std::vector<std::string> class_names;
  std::map<std::string, std::string> metadata;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  std::vector<Index> labeled_indices() const;
  std::vector<Index> unlabeled_indices() const;

  /// Number of labeled samples per class, indexed by class id - 1.
  std::vector<Index> class_counts() const;

  /// Checks every invariant; throws ValidationError naming the first violation.
  void validate() const;

  /// Rows `rows` in the given order; class metadata is preserved.
  Dataset subset(const std::vector<Index>& rows) const;

  /// Copy with every label removed.
  Dataset without_labels() const;
};

/// Builds a Dataset with generated ids ("0".."n-1"), feature names ("x0"...)
/// and class names ("1".."c").
Dataset make_dataset(Matrix features, LabelVector labels, int class_count);

struct CsvOptions {
  std::string label_column = "label";
  std::string unlabeled_marker = "?";
  /// Column holding sample ids; used when present in the header.
  std::string id_column = "sample_id";
  /// Extra non-feature columns to skip (e.g. a period column).
  std::vector<std::string> ignore_columns;
};

/// Reads a comma-separated file with a header row. Every column other than
/// the label, id and ignored columns must be numeric. Class ids follow the
/// first-appearance order of distinct label strings.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Same as load_csv, but from an in-memory string. `source` names the input in errors.
Dataset parse_csv(const std::string& text, const CsvOptions& options = {},
                  const std::string& source = "<string>");

/// Reads one named column of a CSV file as raw strings (for period/truth columns).
std::vector<std::string> read_csv_column(const std::filesystem::path& path, const std::string& column);

/// Writes sample_id, features (17 significant digits) and the label column.
/// Unlabeled samples get `options.unlabeled_marker`.
void save_csv(const Dataset& d, const std::filesystem::path& path, const CsvOptions& options = {});
std::string to_csv(const Dataset& d, const CsvOptions& options = {});

/// Per-feature min/max fitted on one dataset and applied to any other.
struct Normalizer {
  Vector min;
  Vector max;
};

Normalizer fit_minmax(const Dataset& d);

/// (x - min) / (max - min) per feature; constant features map to 0.
/// Values outside the fitted range pass through unclamped.
Dataset apply_minmax(const Normalizer& nr, const Dataset& d);

inline constexpr double kFourGaussianSigma = 0.212;
inline constexpr double kFourGaussianCenter = 0.45;

/// Four isotropic Gaussian clouds around (+-0.45, +-0.45) in 2-D, classes 1..4
/// in the order (0.45,0.45), (0.45,-0.45), (-0.45,0.45), (-0.45,-0.45).
/// Rows are grouped by class.
Dataset gen_four_gaussians(Index n_per_class, double sigma = kFourGaussianSigma, std::uint64_t seed = 0);

/// Two-class imbalanced set: class 1 (majority) and class 2 (minority) drawn
/// from overlapping Gaussians in `dim` dimensions. Rows are shuffled.
struct ImbalancedConfig {
  Index n = 2000;
  double minority_fraction = 0.05;
  Index dim = 4;
  double separation = 2.0;
  double sigma = 1.0;
};
Dataset gen_imbalanced(const ImbalancedConfig& cfg, std::uint64_t seed);

}  // namespace semisup
