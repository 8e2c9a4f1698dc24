#include "semisup/classify.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace semisup {

void KnnModel::validate() const {
  if (k < 1) throw ValidationError("knn: k must be >= 1");
  if (reference.rows() == 0) throw ValidationError("knn: empty reference set");
  if (static_cast<Index>(labels.size()) != reference.rows())
    throw ValidationError("knn: label count does not match reference rows");
  if (class_count < 1) throw ValidationError("knn: class_count must be >= 1");
  for (const int l : labels)
    if (l < 1 || l > class_count) throw ValidationError("knn: label " + std::to_string(l) + " out of range");
}

SoftLabelField knn_predict(const KnnModel& model, const Matrix& queries) {
  model.validate();
  if (queries.cols() != model.reference.cols())
    throw ValidationError("knn: query dimension " + std::to_string(queries.cols()) + " != reference dimension " +
                          std::to_string(model.reference.cols()));
  Matrix scores = Matrix::Zero(queries.rows(), model.class_count);
  std::vector<std::string> warnings;
  for (Index q = 0; q < queries.rows(); ++q) {
    const Vector query = queries.row(q).transpose();
    const auto nn = nearest_rows(model.reference, query, model.k, model.metric);
    Index used = 0;
    for (const Index r : nn) {
      if (distance(model.reference.row(r).transpose(), query, model.metric) > model.max_distance) break;
      scores(q, model.labels[static_cast<std::size_t>(r)] - 1) += 1.0;
      ++used;
    }
    if (used > 0)
      scores.row(q) /= static_cast<double>(used);
    else
      warnings.push_back("knn: query " + std::to_string(q) + " has no neighbour within max_distance");
  }
  auto field = make_field(std::move(scores));
  field.warnings = std::move(warnings);
  return field;
}

Vector LinearModel::decision(const Matrix& x) const {
  return (x * w).array() + b;
}

LinearModel linreg_fit(const Matrix& x, const Vector& y, const Vector& weights) {
  const Index n = x.rows(), d = x.cols();
  if (n == 0) throw ValidationError("linreg: no training samples");
  if (y.size() != n || weights.size() != n) throw ValidationError("linreg: target/weight length mismatch");
  if ((weights.array() < 0.0).any() || weights.sum() <= 0.0)
    throw ValidationError("linreg: weights must be nonnegative with positive sum");
  Matrix a(n, d + 1);
  a.leftCols(d) = x;
  a.col(d).setOnes();
  const Matrix aw = a.transpose() * weights.asDiagonal();
  Matrix normal = aw * a;
  const double ridge = kLinregRidge * weights.mean();
  normal.diagonal().head(d).array() += ridge;
  const Vector rhs = aw * y;
  const Vector sol = normal.ldlt().solve(rhs);
  LinearModel m;
  m.w = sol.head(d);
  m.b = sol[d];
  if (!m.w.allFinite() || !std::isfinite(m.b)) throw RuntimeError("linreg: non-finite solution");
  return m;
}

Vector linreg_predict(const LinearModel& m, const Matrix& x) { return m.decision(x); }

Matrix LinearClassifier::scores(const Matrix& x) const {
  Matrix s(x.rows(), class_count);
  for (int c = 0; c < class_count; ++c) s.col(c) = models[static_cast<std::size_t>(c)].decision(x);
  return s;
}

std::vector<int> LinearClassifier::predict(const Matrix& x) const { return harden(scores(x)); }

Vector one_vs_rest_targets(const std::vector<int>& labels, int positive) {
  Vector y(static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<Index>(i)] = labels[i] == positive ? 1.0 : -1.0;
  return y;
}

namespace {

void check_classes(const std::vector<int>& labels, int class_count, const char* who) {
  std::vector<int> seen(static_cast<std::size_t>(class_count), 0);
  for (const int l : labels) {
    if (l < 1 || l > class_count)
      throw ValidationError(std::string(who) + ": label " + std::to_string(l) + " out of range");
    ++seen[static_cast<std::size_t>(l - 1)];
  }
  for (int c = 0; c < class_count; ++c)
    if (seen[static_cast<std::size_t>(c)] == 0)
      throw ValidationError(std::string(who) + ": class " + std::to_string(c + 1) + " has no training sample");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

LinearClassifier linreg_fit_multiclass(const Matrix& x, const std::vector<int>& labels, int class_count,
                                       const Vector& weights) {
  check_classes(labels, class_count, "linreg");
  LinearClassifier out;
  out.class_count = class_count;
  out.kind = "linreg";
  out.config = "ridge=" + format_real(kLinregRidge);
  if (class_count == 1) {
    LinearModel m;
    m.w = Vector::Zero(x.cols());
    m.b = 1.0;
    out.models.push_back(m);
    return out;
  }
  for (int c = 1; c <= class_count; ++c) {
    out.models.push_back(linreg_fit(x, one_vs_rest_targets(labels, c), weights));
    out.models.back().trained_on = "class " + std::to_string(c) + " vs rest, n=" + std::to_string(x.rows());
  }
  return out;
}

std::string linear_to_text(const LinearClassifier& m) {
  std::ostringstream os;
  os << "semisup-linear 1\n";
  os << "kind " << m.kind << "\n";
  os << "classes " << m.class_count << "\n";
  os << "dim " << (m.models.empty() ? 0 : m.models.front().w.size()) << "\n";
  for (const auto& lm : m.models) {
    os << "w";
    for (Index j = 0; j < lm.w.size(); ++j) os << ' ' << format_real(lm.w[j]);
    os << "\nb " << format_real(lm.b) << "\n";
  }
  os << "config " << m.config << "\n";
  os << "digest " << std::hex << std::setw(16) << std::setfill('0') << fnv1a(m.config) << "\n";
  return os.str();
}

LinearClassifier linear_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  LinearClassifier m;
  Index dim = -1;
  std::string digest;
  int line_no = 0;
  const auto fail = [&](const std::string& why) {
    throw ParseError("linear model, line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (line_no == 1) {
      if (key != "semisup-linear") fail("missing header");
    } else if (key == "kind") {
      ls >> m.kind;
    } else if (key == "classes") {
      ls >> m.class_count;
    } else if (key == "dim") {
      ls >> dim;
    } else if (key == "w") {
      if (dim < 0) fail("'w' before 'dim'");
      LinearModel lm;
      lm.w.resize(dim);
      for (Index j = 0; j < dim; ++j)
        if (!(ls >> lm.w[j])) fail("expected " + std::to_string(dim) + " weights");
      m.models.push_back(lm);
    } else if (key == "b") {
      if (m.models.empty()) fail("'b' before 'w'");
      if (!(ls >> m.models.back().b)) fail("bad intercept");
    } else if (key == "config") {
      const auto pos = line.find(' ');
      m.config = pos == std::string::npos ? "" : line.substr(pos + 1);
    } else if (key == "digest") {
      ls >> digest;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (line_no == 0) throw ParseError("linear model: empty input");
  if (static_cast<int>(m.models.size()) != m.class_count)
    throw ParseError("linear model: expected " + std::to_string(m.class_count) + " models, found " +
                     std::to_string(m.models.size()));
  std::ostringstream expect;
  expect << std::hex << std::setw(16) << std::setfill('0') << fnv1a(m.config);
  if (digest != expect.str()) throw ParseError("linear model: config digest mismatch");
  return m;
}

void save_linear(const LinearClassifier& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << linear_to_text(m);
}

LinearClassifier load_linear(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return linear_from_text(ss.str());
}

namespace {

Matrix logistic(Matrix s) { return (1.0 / (1.0 + (-s.array()).exp())).matrix(); }

class KnnClassifier final : public Classifier {
 public:
  KnnClassifier(Index k, Metric m) {
    model_.k = k;
    model_.metric = m;
  }
  void fit(const Matrix& x, const std::vector<int>& labels, int class_count, const Vector&,
           const Matrix&) override {
    model_.reference = x;
    model_.labels = labels;
    model_.class_count = class_count;
    model_.validate();
  }
  Matrix score(const Matrix& x) const override {
    KnnModel m = model_;
    m.k = std::min<Index>(m.k, m.reference.rows());
    return knn_predict(m, x).scores;
  }
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<KnnClassifier>(*this); }
  std::string name() const override { return "knn"; }

 private:
  KnnModel model_;
};

class LinregClassifier final : public Classifier {
 public:
  void fit(const Matrix& x, const std::vector<int>& labels, int class_count, const Vector& weights,
           const Matrix&) override {
    model_ = linreg_fit_multiclass(x, labels, class_count, weights);
  }
  Matrix score(const Matrix& x) const override { return logistic(model_.scores(x)); }
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<LinregClassifier>(*this); }
  std::string name() const override { return "linreg"; }

 private:
  LinearClassifier model_;
};

class TsvmClassifier final : public Classifier {
 public:
  explicit TsvmClassifier(TsvmConfig cfg) : cfg_(std::move(cfg)) {}
  void fit(const Matrix& x, const std::vector<int>& labels, int class_count, const Vector& weights,
           const Matrix& unlabeled) override {
    model_ = tsvm_fit_multiclass(x, labels, class_count, weights, unlabeled, cfg_);
  }
  Matrix score(const Matrix& x) const override { return logistic(model_.scores(x)); }
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<TsvmClassifier>(*this); }
  std::string name() const override { return "tsvm"; }

 private:
  TsvmConfig cfg_;
  LinearClassifier model_;
};

}  // namespace

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec) {
  if (spec.kind == "knn") {
    if (spec.k < 1) throw ValidationError("knn: k must be >= 1");
    return std::make_unique<KnnClassifier>(spec.k, spec.metric);
  }
  if (spec.kind == "linreg") return std::make_unique<LinregClassifier>();
  if (spec.kind == "tsvm") {
    spec.tsvm.validate();
    return std::make_unique<TsvmClassifier>(spec.tsvm);
  }
  throw ValidationError("unknown classifier '" + spec.kind + "' (expected knn, linreg or tsvm)");
}

}  // namespace semisup
