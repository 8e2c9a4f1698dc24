#include "semisup/selftrain.hpp"

#include "semisup/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace semisup {

double confidence(const Eigen::Ref<const Vector>& scores) {
  if (scores.size() < 2) throw ValidationError("confidence: need at least 2 class scores");
  double v1 = -std::numeric_limits<double>::infinity(), v2 = v1;
  for (Index j = 0; j < scores.size(); ++j) {
    const double s = scores[j];
    if (s > v1) {
      v2 = v1;
      v1 = s;
    } else if (s > v2) {
      v2 = s;
    }
  }
  if (v1 == 0.0) return 0.0;
  return (v1 - v2) / std::abs(v1);
}

void DecisionThresholds::validate() const {
  if (!(0.0 <= low && low <= final_high && final_high <= high && high <= 1.0))
    throw ValidationError("thresholds: require 0 <= low <= final_high <= high <= 1 (got low=" + format_real(low) +
                          ", final_high=" + format_real(final_high) + ", high=" + format_real(high) + ")");
}

double DecisionThresholds::high_at(int pass, int passes) const {
  if (passes < 1 || high == 0.0) return high;
  const double r = std::pow(final_high / high, 1.0 / static_cast<double>(passes));
  if (pass >= passes) return final_high;
  return std::max(final_high, high * std::pow(r, static_cast<double>(pass)));
}

std::vector<double> DecisionThresholds::trajectory(int passes) const {
  std::vector<double> out;
  for (int t = 0; t <= passes; ++t) out.push_back(high_at(t, passes));
  return out;
}

Refinement refine_from_similarities(const Vector& base, const Vector& similarities, const Matrix& outputs,
                                    int class_count, std::uint64_t seed) {
  const Index n = similarities.size();
  if (n == 0) throw ValidationError("similarity_refine: labeled set is empty");
  if (outputs.rows() != n) throw ValidationError("similarity_refine: output rows != labeled count");
  if (outputs.cols() != base.size()) throw ValidationError("similarity_refine: output width != class count");
  Refinement out;
  out.scores = base;
  const double lo = similarities.minCoeff(), hi = similarities.maxCoeff();
  if (hi == lo) {
    out.warnings.push_back("similarity_refine: all similarities equal, clustering skipped");
    for (Index i = 0; i < n; ++i) {
      out.members.push_back(i);
      out.similarity.push_back(similarities[i]);
      out.scores += similarities[i] * outputs.row(i).transpose();
    }
    return out;
  }
  const Vector norm = ((similarities.array() - lo) / (hi - lo)).matrix();
  std::set<double> distinct(norm.data(), norm.data() + n);
  const Index k = std::min<Index>(std::max(class_count, 1), static_cast<Index>(distinct.size()));
  const auto clusters = kmeans(Matrix(norm), k, Metric::SqEuclidean, seed);
  Index top = 0;
  for (Index c = 1; c < k; ++c)
    if (clusters.centroids(c, 0) > clusters.centroids(top, 0)) top = c;
  for (Index i = 0; i < n; ++i) {
    if (clusters.assignment[static_cast<std::size_t>(i)] != top + 1) continue;
    out.members.push_back(i);
    out.similarity.push_back(norm[i]);
    out.scores += norm[i] * outputs.row(i).transpose();
  }
  return out;
}

Refinement similarity_refine(const Eigen::Ref<const Vector>& u, const Vector& base, const Matrix& labeled,
                             const Matrix& outputs, int class_count, Metric metric, std::uint64_t seed) {
  if (labeled.rows() == 0) throw ValidationError("similarity_refine: labeled set is empty");
  if (labeled.cols() != u.size()) throw ValidationError("similarity_refine: dimension mismatch");
  Vector sim(labeled.rows());
  for (Index i = 0; i < labeled.rows(); ++i) sim[i] = 1.0 / (1.0 + distance(u, labeled.row(i).transpose(), metric));
  return refine_from_similarities(base, sim, outputs, class_count, seed);
}

bool any_positive_rule(const Eigen::Ref<const Vector>& u, const Matrix& labeled, const std::vector<bool>& positive,
                       Index k) {
  if (labeled.rows() == 0) throw ValidationError("any_positive_rule: labeled set is empty");
  if (static_cast<Index>(positive.size()) != labeled.rows())
    throw ValidationError("any_positive_rule: label count != labeled rows");
  if (k < 1 || k > labeled.rows()) throw ValidationError("any_positive_rule: k must lie in 1..|labeled|");
  for (const Index i : nearest_rows(labeled, u, k))
    if (positive[static_cast<std::size_t>(i)]) return true;
  return false;
}

ConsensusResult consensus_init(const Matrix& points, const std::vector<Metric>& metrics,
                               const std::vector<double>& weights, std::uint64_t seed) {
  if (metrics.empty()) throw ValidationError("consensus_init: at least one metric is required");
  if (weights.size() != metrics.size()) throw ValidationError("consensus_init: one weight per metric is required");
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("consensus_init: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("consensus_init: weights must sum to 1");

  const Index n = points.rows();
  ConsensusResult out;
  out.votes = Matrix::Zero(n, static_cast<Index>(metrics.size()));
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const auto cl = kmeans(points, 2, metrics[m], seed);
    Index size1 = 0;
    for (const Index a : cl.assignment) size1 += a == 1 ? 1 : 0;
    const Index size2 = n - size1;
    Index positive = size1 < size2 ? 1 : 2;
    if (size1 == size2) {
      positive = cl.centroids.row(0).norm() <= cl.centroids.row(1).norm() ? 1 : 2;
      out.log.push_back("metric " + to_string(metrics[m]) + ": equal cluster sizes, cluster with smaller centroid norm taken as positive");
    }
    for (Index i = 0; i < n; ++i)
      out.votes(i, static_cast<Index>(m)) = cl.assignment[static_cast<std::size_t>(i)] == positive ? 1.0 : 0.0;
  }
  out.score = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t m = 0; m < metrics.size(); ++m) s += weights[m] * out.votes(i, static_cast<Index>(m));
    out.score[i] = s;
    if (std::abs(s - 0.5) <= 1e-12) {
      out.positive.push_back(false);
      out.log.push_back("sample " + std::to_string(i) + ": vote tied at 0.5, labeled negative");
    } else {
      out.positive.push_back(s > 0.5);
    }
  }
  return out;
}

std::string audit_to_csv(const AuditLog& log) {
  std::ostringstream os;
  os << "item,pass,scenario,confidence,oracle,label\n";
  for (const auto& o : log.outcomes)
    os << (o.sample_id.empty() ? std::to_string(o.item) : o.sample_id) << ',' << o.pass << ',' << o.scenario << ','
       << format_real(o.confidence) << ',' << (o.oracle_queried ? 1 : 0) << ',' << o.resolved_label << '\n';
  return os.str();
}

void save_audit(const AuditLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << audit_to_csv(log);
}

namespace {

struct Pools {
  Matrix x;
  std::vector<int> y;
};

Pools training_pool(const Matrix& seed_x, const std::vector<int>& seed_y, const Matrix& stream,
                    const std::vector<Index>& seed_items, const std::vector<int>& seed_item_labels,
                    const std::vector<std::optional<int>>& pseudo) {
  Index extra = static_cast<Index>(seed_items.size());
  for (const auto& p : pseudo) extra += p ? 1 : 0;
  Pools out;
  out.x.resize(seed_x.rows() + extra, seed_x.cols());
  out.x.topRows(seed_x.rows()) = seed_x;
  out.y = seed_y;
  Index r = seed_x.rows();
  for (std::size_t i = 0; i < seed_items.size(); ++i) {
    out.x.row(r++) = stream.row(seed_items[i]);
    out.y.push_back(seed_item_labels[i]);
  }
  for (std::size_t j = 0; j < pseudo.size(); ++j)
    if (pseudo[j]) {
      out.x.row(r++) = stream.row(static_cast<Index>(j));
      out.y.push_back(*pseudo[j]);
    }
  return out;
}

}  // namespace

SelftrainResult selftrain_run(const Classifier& base, const Matrix& seed_x, const std::vector<int>& seed_y,
                              int class_count, const Matrix& stream, OracleContract& oracle,
                              const SelftrainConfig& cfg, const std::vector<std::string>& stream_ids) {
  cfg.thresholds.validate();
  if (cfg.passes < 1) throw ValidationError("selftrain: passes must be >= 1");
  if (class_count < 2) throw ValidationError("selftrain: need at least 2 classes");
  if (static_cast<Index>(seed_y.size()) != seed_x.rows()) throw ValidationError("selftrain: seed label length mismatch");
  if (stream.rows() > 0 && stream.cols() != seed_x.cols()) throw ValidationError("selftrain: stream dimension mismatch");
  if (!stream_ids.empty() && static_cast<Index>(stream_ids.size()) != stream.rows())
    throw ValidationError("selftrain: stream id count mismatch");
  std::vector<int> covered(static_cast<std::size_t>(class_count), 0);
  for (const int l : seed_y) {
    if (l < 1 || l > class_count) throw ValidationError("selftrain: seed label out of range");
    covered[static_cast<std::size_t>(l - 1)] = 1;
  }
  for (int c = 0; c < class_count; ++c)
    if (!covered[static_cast<std::size_t>(c)])
      throw ValidationError("selftrain: seed set has no sample of class " + std::to_string(c + 1));
  if (!oracle.label) throw ValidationError("selftrain: oracle callback is not set");

  SelftrainResult out;
  const Index u = stream.rows();
  out.pseudo.assign(static_cast<std::size_t>(u), std::nullopt);
  std::vector<bool> in_seed(static_cast<std::size_t>(u), false);
  std::vector<int> seed_item_labels;

  const auto fit = [&]() {
    const auto pool = training_pool(seed_x, seed_y, stream, out.seed_items, seed_item_labels, out.pseudo);
    Matrix rest(u, stream.cols());
    Index r = 0;
    for (Index j = 0; j < u; ++j)
      if (!in_seed[static_cast<std::size_t>(j)] && !out.pseudo[static_cast<std::size_t>(j)]) rest.row(r++) = stream.row(j);
    auto model = base.clone();
    model->fit(pool.x, pool.y, class_count, Vector::Ones(pool.x.rows()), rest.topRows(r));
    return model;
  };

  out.model = fit();
  for (int pass = 0; pass < cfg.passes; ++pass) {
    const double high = cfg.thresholds.high_at(pass, cfg.passes);
    out.log.thresholds.push_back(high);
    Index items = 0;
    for (Index j = 0; j < u; ++j) {
      if (in_seed[static_cast<std::size_t>(j)]) continue;
      ++items;
      ScenarioOutcome o;
      o.item = j;
      if (!stream_ids.empty()) o.sample_id = stream_ids[static_cast<std::size_t>(j)];
      o.pass = pass;
      o.threshold = high;
      o.base_output = out.model->score(stream.row(j)).row(0).transpose();
      o.confidence = confidence(o.base_output);
      const int base_label = static_cast<int>(argmax_first(o.base_output)) + 1;
      bool ask = false;
      if (o.confidence >= high) {
        o.scenario = 1;
        o.resolved_label = base_label;
      } else if (o.confidence >= cfg.thresholds.low) {
        const auto pool = training_pool(seed_x, seed_y, stream, out.seed_items, seed_item_labels,
                                        std::vector<std::optional<int>>(static_cast<std::size_t>(u)));
        const Matrix outputs = out.model->score(pool.x);
        const auto ref = similarity_refine(stream.row(j).transpose(), o.base_output, pool.x, outputs, class_count,
                                           cfg.metric, cfg.seed);
        o.refined_output = ref.scores;
        if (static_cast<int>(argmax_first(ref.scores)) + 1 == base_label) {
          o.scenario = 2;
          o.resolved_label = base_label;
        } else {
          ask = true;
        }
      } else {
        ask = true;
      }
      if (ask) {
        o.scenario = 3;
        o.oracle_queried = true;
        int label = 0;
        try {
          label = oracle.label(j);
        } catch (const std::exception& e) {
          out.log.aborted = true;
          out.log.abort_reason = std::string("oracle failed on item ") + std::to_string(j) + ": " + e.what();
          throw SelftrainAborted(out.log.abort_reason, out.log);
        }
        ++oracle.queries;
        if (label < 1 || label > class_count) {
          out.log.aborted = true;
          out.log.abort_reason = "oracle returned invalid class " + std::to_string(label) + " for item " + std::to_string(j);
          throw SelftrainAborted(out.log.abort_reason, out.log);
        }
        o.resolved_label = label;
        in_seed[static_cast<std::size_t>(j)] = true;
        out.pseudo[static_cast<std::size_t>(j)].reset();
        out.seed_items.push_back(j);
        seed_item_labels.push_back(label);
      } else {
        out.pseudo[static_cast<std::size_t>(j)] = o.resolved_label;
      }
      out.log.outcomes.push_back(std::move(o));
    }
    out.log.items_per_pass.push_back(items);
    out.model = fit();
    Index pseudo_count = 0;
    for (const auto& p : out.pseudo) pseudo_count += p ? 1 : 0;
    out.log.seed_pool_sizes.push_back(seed_x.rows() + static_cast<Index>(out.seed_items.size()));
    out.log.pseudo_pool_sizes.push_back(pseudo_count);
  }
  out.log.thresholds.push_back(cfg.thresholds.high_at(cfg.passes, cfg.passes));
  return out;
}

}  // namespace semisup
