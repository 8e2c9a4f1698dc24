#include "semisup/classify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace semisup {

void TsvmConfig::validate() const {
  if (!(c > 0.0)) throw ValidationError("tsvm: C must be > 0");
  if (!(c_star >= 0.0)) throw ValidationError("tsvm: C* must be >= 0");
  if (anneal_steps < 1) throw ValidationError("tsvm: anneal_steps must be >= 1");
  if (max_inner_steps < 1) throw ValidationError("tsvm: max_inner_steps must be >= 1");
  if (!(gradient_tolerance > 0.0)) throw ValidationError("tsvm: gradient_tolerance must be > 0");
  if (!(initial_step > 0.0)) throw ValidationError("tsvm: initial_step must be > 0");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ValidationError("tsvm: backtrack must lie in (0, 1)");
  if (!(armijo > 0.0 && armijo < 1.0)) throw ValidationError("tsvm: armijo must lie in (0, 1)");
  for (const auto& [cls, w] : class_weights)
    if (!(w > 0.0)) throw ValidationError("tsvm: class weight of class " + std::to_string(cls) + " must be > 0");
}

std::string TsvmConfig::describe() const {
  std::ostringstream os;
  os << "C=" << format_real(c) << " C*=" << format_real(c_star) << " anneal=" << anneal_steps
     << " inner=" << max_inner_steps << " tol=" << format_real(gradient_tolerance)
     << " balance=" << (balance ? 1 : 0);
  for (const auto& [cls, w] : class_weights) os << " w" << cls << "=" << format_real(w);
  return os.str();
}

double unlabeled_loss(double t) { return std::exp(-3.0 * t * t); }

double tsvm_objective(const LinearModel& m, const Matrix& labeled, const Vector& y, const Vector& weights,
                      const Matrix& unlabeled, double c, double c_star) {
  double obj = 0.5 * m.w.squaredNorm();
  if (labeled.rows() > 0) {
    const Vector f = m.decision(labeled);
    for (Index i = 0; i < f.size(); ++i) {
      const double h = std::max(0.0, 1.0 - y[i] * f[i]);
      obj += c * weights[i] * h * h;
    }
  }
  if (unlabeled.rows() > 0 && c_star > 0.0) {
    const Vector f = m.decision(unlabeled);
    for (Index j = 0; j < f.size(); ++j) obj += c_star * unlabeled_loss(f[j]);
  }
  return obj;
}

namespace {

struct Problem {
  const Matrix& xl;
  const Vector& y;
  const Vector& wt;
  const Matrix& xu;
  double c;
};

// Objective and gradient with respect to (w, b).
double evaluate(const Problem& p, double c_star, const LinearModel& m, Vector* gw, double* gb) {
  double obj = 0.5 * m.w.squaredNorm();
  Vector coeff_l, coeff_u;
  if (p.xl.rows() > 0) {
    const Vector f = m.decision(p.xl);
    coeff_l.resize(f.size());
    for (Index i = 0; i < f.size(); ++i) {
      const double h = std::max(0.0, 1.0 - p.y[i] * f[i]);
      obj += p.c * p.wt[i] * h * h;
      coeff_l[i] = -2.0 * p.c * p.wt[i] * h * p.y[i];
    }
  }
  if (p.xu.rows() > 0 && c_star > 0.0) {
    const Vector f = m.decision(p.xu);
    coeff_u.resize(f.size());
    for (Index j = 0; j < f.size(); ++j) {
      const double e = unlabeled_loss(f[j]);
      obj += c_star * e;
      coeff_u[j] = -6.0 * c_star * f[j] * e;
    }
  }
  if (gw) {
    *gw = m.w;
    *gb = 0.0;
    if (coeff_l.size() > 0) {
      *gw += p.xl.transpose() * coeff_l;
      *gb += coeff_l.sum();
    }
    if (coeff_u.size() > 0) {
      *gw += p.xu.transpose() * coeff_u;
      *gb += coeff_u.sum();
    }
  }
  return obj;
}

void run_stage(const Problem& p, const TsvmConfig& cfg, LinearModel& m, TsvmStage& stage, double& step) {
  Vector gw;
  double gb = 0.0;
  double obj = evaluate(p, stage.c_star, m, &gw, &gb);
  stage.objective.push_back(obj);
  for (int it = 0; it < cfg.max_inner_steps; ++it) {
    const double gnorm2 = gw.squaredNorm() + gb * gb;
    if (std::sqrt(gnorm2) < cfg.gradient_tolerance) {
      stage.converged = true;
      return;
    }
    double t = std::min(step / cfg.backtrack, 1e6);
    LinearModel trial;
    double trial_obj = obj;
    bool accepted = false;
    while (t > 1e-30) {
      trial.w = m.w - t * gw;
      trial.b = m.b - t * gb;
      trial_obj = evaluate(p, stage.c_star, trial, nullptr, nullptr);
      if (trial_obj <= obj - cfg.armijo * t * gnorm2) {
        accepted = true;
        break;
      }
      t *= cfg.backtrack;
    }
    if (!accepted) {
      stage.converged = true;  // no descent possible at machine precision
      return;
    }
    step = t;
    m.w = trial.w;
    m.b = trial.b;
    obj = evaluate(p, stage.c_star, m, &gw, &gb);
    stage.objective.push_back(obj);
    ++stage.steps;
  }
}

double balance_shift(const Vector& f, double positive_fraction) {
  const Index u = f.size();
  std::vector<double> v(f.data(), f.data() + u);
  std::sort(v.begin(), v.end(), std::greater<>());
  const auto k = static_cast<Index>(std::llround(positive_fraction * static_cast<double>(u)));
  if (k <= 0) return v.front() + 1.0;
  if (k >= u) return v.back() - 1.0;
  return 0.5 * (v[static_cast<std::size_t>(k - 1)] + v[static_cast<std::size_t>(k)]);
}

}  // namespace

TsvmResult tsvm_train(const Matrix& labeled, const Vector& y, const Vector& weights, const Matrix& unlabeled,
                      const TsvmConfig& cfg) {
  cfg.validate();
  const Index n = labeled.rows();
  if (y.size() != n || weights.size() != n) throw ValidationError("tsvm: target/weight length mismatch");
  if (unlabeled.rows() > 0 && unlabeled.cols() != labeled.cols())
    throw ValidationError("tsvm: labeled and unlabeled dimensions differ");
  bool pos = false, neg = false;
  for (Index i = 0; i < n; ++i) {
    if (y[i] == 1.0)
      pos = true;
    else if (y[i] == -1.0)
      neg = true;
    else
      throw ValidationError("tsvm: targets must be +1 or -1");
  }
  if (!pos || !neg) throw ValidationError("tsvm: labeled data must contain both classes");
  if ((weights.array() <= 0.0).any()) throw ValidationError("tsvm: sample weights must be > 0");

  const Problem p{labeled, y, weights, unlabeled, cfg.c};
  TsvmResult out;
  out.model.w = Vector::Zero(labeled.cols());
  out.model.b = 0.0;
  const double labeled_fraction = static_cast<double>((y.array() > 0.0).count()) / static_cast<double>(n);
  double step = cfg.initial_step;
  for (int s = 0; s < cfg.anneal_steps; ++s) {
    TsvmStage stage;
    stage.c_star = cfg.c_star / std::ldexp(1.0, cfg.anneal_steps - 1 - s);
    run_stage(p, cfg, out.model, stage, step);
    if (cfg.balance && unlabeled.rows() > 0) {
      const double shift = balance_shift(out.model.decision(unlabeled), labeled_fraction);
      out.model.b -= shift;
      stage.intercept_shift = -shift;
    }
    out.stages.push_back(std::move(stage));
  }
  out.model.trained_on = "n_labeled=" + std::to_string(n) + " n_unlabeled=" + std::to_string(unlabeled.rows());
  return out;
}

LinearClassifier tsvm_fit_multiclass(const Matrix& x, const std::vector<int>& labels, int class_count,
                                     const Vector& weights, const Matrix& unlabeled, const TsvmConfig& cfg,
                                     std::vector<TsvmResult>* audit) {
  if (class_count < 2) throw ValidationError("tsvm: need at least 2 classes");
  if (static_cast<Index>(labels.size()) != x.rows()) throw ValidationError("tsvm: label length mismatch");
  Vector wt = weights;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = cfg.class_weights.find(labels[i]);
    if (it != cfg.class_weights.end()) wt[static_cast<Index>(i)] *= it->second;
  }
  LinearClassifier out;
  out.class_count = class_count;
  out.kind = "tsvm";
  out.config = cfg.describe();
  if (audit) audit->clear();
  if (class_count == 2) {
    // The two one-vs-rest problems mirror each other exactly.
    auto r = tsvm_train(x, one_vs_rest_targets(labels, 2), wt, unlabeled, cfg);
    LinearModel neg = r.model;
    neg.w = -neg.w;
    neg.b = -neg.b;
    out.models = {neg, r.model};
    if (audit) audit->push_back(std::move(r));
    return out;
  }
  for (int c = 1; c <= class_count; ++c) {
    auto r = tsvm_train(x, one_vs_rest_targets(labels, c), wt, unlabeled, cfg);
    out.models.push_back(r.model);
    if (audit) audit->push_back(std::move(r));
  }
  return out;
}

GraphSpec full_graph_spec() {
  GraphSpec g;
  g.kind = GraphKind::FullRbf;
  return g;
}

EmbeddedModel embed_and_train(const Dataset& d, double rho, Index p, const TsvmConfig& cfg, const GraphSpec& base) {
  d.validate();
  const auto dist = rho_path_distances(d.features, base, rho);
  EmbeddedModel out;
  out.embedding = mds_embed(dist, p);
  const auto lab = d.labeled_indices();
  const auto unl = d.unlabeled_indices();
  Matrix xl(static_cast<Index>(lab.size()), out.embedding.coords.cols());
  Matrix xu(static_cast<Index>(unl.size()), out.embedding.coords.cols());
  std::vector<int> y;
  for (std::size_t i = 0; i < lab.size(); ++i) {
    xl.row(static_cast<Index>(i)) = out.embedding.coords.row(lab[i]);
    y.push_back(*d.labels[static_cast<std::size_t>(lab[i])]);
  }
  for (std::size_t i = 0; i < unl.size(); ++i) xu.row(static_cast<Index>(i)) = out.embedding.coords.row(unl[i]);
  out.classifier = tsvm_fit_multiclass(xl, y, d.class_count, Vector::Ones(xl.rows()), xu, cfg, &out.audit);
  out.field = make_field(out.classifier.scores(out.embedding.coords));
  return out;
}

}  // namespace semisup
