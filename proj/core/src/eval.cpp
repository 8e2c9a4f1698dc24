#include "semisup/eval.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace semisup {

ConfusionMatrix confusion(const std::vector<int>& pred, const std::vector<int>& truth, int class_count,
                          int positive_class) {
  if (pred.size() != truth.size())
    throw ValidationError("confusion: " + std::to_string(pred.size()) + " predictions vs " +
                          std::to_string(truth.size()) + " truth labels");
  if (class_count < 1) throw ValidationError("confusion: class_count must be >= 1");
  if (positive_class < 1 || positive_class > class_count)
    throw ValidationError("confusion: positive class " + std::to_string(positive_class) + " out of range");
  ConfusionMatrix cm;
  cm.positive_class = positive_class;
  cm.counts.setZero(class_count, class_count);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i], t = truth[i];
    if (p < 1 || p > class_count || t < 1 || t > class_count)
      throw ValidationError("confusion: label out of range at position " + std::to_string(i));
    ++cm.counts(t - 1, p - 1);
    const bool pp = p == positive_class, tp = t == positive_class;
    if (pp && tp)
      ++cm.tp;
    else if (pp)
      ++cm.fp;
    else if (tp)
      ++cm.fn;
    else
      ++cm.tn;
  }
  return cm;
}

ConfusionMatrix confusion_from_counts(long long tp, long long fp, long long tn, long long fn) {
  if (tp < 0 || fp < 0 || tn < 0 || fn < 0) throw ValidationError("confusion: counts must be nonnegative");
  ConfusionMatrix cm;
  cm.positive_class = 1;
  cm.counts.resize(2, 2);
  cm.counts << tp, fn, fp, tn;
  cm.tp = tp;
  cm.fp = fp;
  cm.tn = tn;
  cm.fn = fn;
  return cm;
}

const std::array<const char*, 9>& MetricReport::names() {
  static const std::array<const char*, 9> n{"TPR", "SPC", "PPV", "NPV", "FPR", "FDR", "FNR", "ACC", "F1"};
  return n;
}

std::array<std::optional<double>, 9> MetricReport::values() const {
  return {tpr, spc, ppv, npv, fpr, fdr, fnr, acc, f1};
}

namespace {

std::optional<double> ratio(long long num, long long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricReport metrics(const ConfusionMatrix& cm) {
  const long long p = cm.tp + cm.fn, n = cm.tn + cm.fp;
  MetricReport r;
  r.tpr = ratio(cm.tp, p);
  r.fnr = ratio(cm.fn, p);
  r.spc = ratio(cm.tn, n);
  r.fpr = ratio(cm.fp, n);
  r.ppv = ratio(cm.tp, cm.tp + cm.fp);
  r.fdr = ratio(cm.fp, cm.tp + cm.fp);
  r.npv = ratio(cm.tn, cm.tn + cm.fn);
  r.acc = ratio(cm.tp + cm.tn, p + n);
  r.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  return r;
}

std::string format_metric(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

RocResult roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw ValidationError("roc_auc: score/label length mismatch");
  const auto n = scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  const auto n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("roc_auc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over tie groups, then the Mann-Whitney U statistic.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (positive[order[t]]) rank_sum += avg;
    i = j;
  }
  RocResult out;
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  out.auc = (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);

  out.curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = n; i > 0;) {
    std::size_t j = i;
    const double s = scores[order[i - 1]];
    while (j > 0 && scores[order[j - 1]] == s) {
      (positive[order[j - 1]] ? tp : fp) += 1;
      --j;
    }
    out.curve.push_back({s, static_cast<double>(fp) / nn, static_cast<double>(tp) / np});
    i = j;
  }
  return out;
}

}  // namespace semisup
