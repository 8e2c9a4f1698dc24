#pragma once

#include "semisup/common.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace semisup {

/// Rows are truth, columns prediction; class ids 1..c.
struct ConfusionMatrix {
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts;
  int positive_class = 1;
  long long tp = 0, fp = 0, tn = 0, fn = 0;

  int class_count() const { return static_cast<int>(counts.rows()); }
  long long total() const { return counts.sum(); }
};

ConfusionMatrix confusion(const std::vector<int>& pred, const std::vector<int>& truth, int class_count,
                          int positive_class);

/// Binary confusion matrix built straight from the four counts.
ConfusionMatrix confusion_from_counts(long long tp, long long fp, long long tn, long long fn);

/// Nine rates; std::nullopt where a denominator is zero.
struct MetricReport {
  std::optional<double> tpr, spc, ppv, npv, fpr, fdr, fnr, acc, f1;

  static const std::array<const char*, 9>& names();
  std::array<std::optional<double>, 9> values() const;
};

MetricReport metrics(const ConfusionMatrix& cm);

/// Undefined values print as "NA".
std::string format_metric(const std::optional<double>& v);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct RocResult {
  double auc = 0.0;
  std::vector<RocPoint> curve;  // from (0,0) to (1,1)
};

/// Mann-Whitney AUC with ties counted as 1/2; curve at every distinct score.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive);

}  // namespace semisup
