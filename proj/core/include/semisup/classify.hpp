#pragma once

#include "semisup/propagation.hpp"

#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace semisup {

struct KnnModel {
  Matrix reference;
  std::vector<int> labels;  // 1-based, one per reference row
  int class_count = 0;
  Index k = 5;
  Metric metric = Metric::Euclidean;
  /// Neighbours farther than this are ignored; a query with none left scores zero.
  double max_distance = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// Vote fractions of the k nearest references (ties by smaller reference index).
SoftLabelField knn_predict(const KnnModel& model, const Matrix& queries);

struct LinearModel {
  Vector w;
  double b = 0.0;
  std::string trained_on;

  double decision(const Eigen::Ref<const Vector>& x) const { return w.dot(x) + b; }
  Vector decision(const Matrix& x) const;
};

inline constexpr double kLinregRidge = 1e-8;

/// Weighted least squares on +-1 targets with an intercept. The ridge on w is
/// kLinregRidge times the mean sample weight.
LinearModel linreg_fit(const Matrix& x, const Vector& y, const Vector& weights);
Vector linreg_predict(const LinearModel& m, const Matrix& x);

/// One linear model per class (one-vs-rest), hardened by the largest decision value.
struct LinearClassifier {
  std::vector<LinearModel> models;
  int class_count = 0;
  std::string kind;    // "linreg" or "tsvm"
  std::string config;  // canonical parameter text, hashed into the saved digest

  Matrix scores(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;
};

/// Per-sample +-1 targets for class `positive` against the rest.
Vector one_vs_rest_targets(const std::vector<int>& labels, int positive);

LinearClassifier linreg_fit_multiclass(const Matrix& x, const std::vector<int>& labels, int class_count,
                                       const Vector& weights);

struct TsvmConfig {
  double c = 1.0;
  double c_star = 0.1;
  int anneal_steps = 5;
  int max_inner_steps = 2000;
  double gradient_tolerance = 1e-6;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  /// Class id -> misclassification-cost multiplier (missing ids weigh 1).
  std::map<int, double> class_weights;
  /// After each stage shift b so the unlabeled positive fraction equals the labeled one.
  bool balance = false;

  void validate() const;
  std::string describe() const;
};

/// exp(-3 t^2).
double unlabeled_loss(double t);

double tsvm_objective(const LinearModel& m, const Matrix& labeled, const Vector& y, const Vector& weights,
                      const Matrix& unlabeled, double c, double c_star);

struct TsvmStage {
  double c_star = 0.0;
  std::vector<double> objective;  // value at stage start and after every accepted step
  int steps = 0;
  bool converged = false;
  double intercept_shift = 0.0;   // balance adjustment applied after the stage
};

struct TsvmResult {
  LinearModel model;
  std::vector<TsvmStage> stages;
};

/// Binary TSVM on +-1 labels. `weights` are per labeled sample (already
/// multiplied by any class weight). C* = 0 is the supervised L2-loss SVM.
TsvmResult tsvm_train(const Matrix& labeled, const Vector& y, const Vector& weights, const Matrix& unlabeled,
                      const TsvmConfig& cfg);

/// One-vs-rest TSVM with class weights from cfg.
LinearClassifier tsvm_fit_multiclass(const Matrix& x, const std::vector<int>& labels, int class_count,
                                     const Vector& weights, const Matrix& unlabeled, const TsvmConfig& cfg,
                                     std::vector<TsvmResult>* audit = nullptr);

/// Transductive pipeline: rho-path distances, MDS embedding, TSVM on the
/// embedded rows. Scores exist only for rows of `d` since the embedding
/// cannot be extended to new points.
struct EmbeddedModel {
  LinearClassifier classifier;
  Embedding embedding;
  SoftLabelField field;
  std::vector<TsvmResult> audit;
};
/// Full base graph.
GraphSpec full_graph_spec();
EmbeddedModel embed_and_train(const Dataset& d, double rho, Index p, const TsvmConfig& cfg,
                              const GraphSpec& base = full_graph_spec());

/// Text record: header, per-model "w" and "b" lines, and a digest of the config.
std::string linear_to_text(const LinearClassifier& m);
LinearClassifier linear_from_text(const std::string& text);
void save_linear(const LinearClassifier& m, const std::filesystem::path& path);
LinearClassifier load_linear(const std::filesystem::path& path);

/// Trainable base model used by the benchmark and self-training drivers.
class Classifier {
 public:
  virtual ~Classifier() = default;
  /// `unlabeled` may be empty; only transductive models use it.
  virtual void fit(const Matrix& x, const std::vector<int>& labels, int class_count, const Vector& weights,
                   const Matrix& unlabeled) = 0;
  /// n x c nonnegative scores.
  virtual Matrix score(const Matrix& x) const = 0;
  virtual std::unique_ptr<Classifier> clone() const = 0;
  virtual std::string name() const = 0;

  std::vector<int> predict(const Matrix& x) const { return harden(score(x)); }
};

struct ClassifierSpec {
  std::string kind = "knn";  // knn | linreg | tsvm
  Index k = 5;
  Metric metric = Metric::Euclidean;
  TsvmConfig tsvm;
};

/// Linear scores are mapped through a logistic so every model reports nonnegative scores.
std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec);

}  // namespace semisup
