// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure not listed with --known-failure.

#include "support.hpp"

#include "semisup/dataset.hpp"
#include "semisup/eval.hpp"
#include "semisup/experiment.hpp"
#include "semisup/metriclearn.hpp"
#include "semisup/pile.hpp"
#include "semisup/propagation.hpp"
#include "semisup/sampling.hpp"
#include "semisup/selftrain.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

namespace {

using namespace semisup;
using semisup::testing::audit_conserved;

// Pinned tolerances and limits.
constexpr double kHarmonicTol = 1e-8;
constexpr double kBoundsSlack = 1e-12;
constexpr double kRowSumTol = 1e-10;
constexpr double kAnchorAgreement = 0.90;
constexpr double kKmeansTol = 1e-9;
constexpr double kAucTol = 1e-12;
constexpr double kMonotoneSlack = 1e-12;
constexpr double kPileAccuracy = 0.80;
constexpr double kPrecisionRatio = 2.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

Outcome harmonic_oracle() {
  Rng rng(101);
  double worst = 0.0;
  bool labeled_exact = true;
  for (int g = 0; g < 50; ++g) {
    const Index n = std::uniform_int_distribution<Index>(2, 30)(rng);
    const int c = std::uniform_int_distribution<int>(2, 4)(rng);
    const Matrix w = testing::random_connected_weights(n, rng);
    const LabelVector labels = testing::random_labels(n, c, rng);
    const SoftLabelField f = harmonic_solve(graph_from_weights(w), labels, c);
    const Matrix ref = testing::gauss_seidel_harmonic(w, labels, c);
    worst = std::max(worst, (f.scores - ref).cwiseAbs().maxCoeff());
    const Matrix y = one_hot(labels, c);
    for (Index i = 0; i < n; ++i)
      if (labels[static_cast<std::size_t>(i)] && f.scores.row(i) != y.row(i)) labeled_exact = false;
  }
  std::ostringstream s;
  s << "max |harmonic - gauss_seidel| = " << worst << " (tol " << kHarmonicTol << "), labeled rows exact = "
    << (labeled_exact ? "yes" : "no");
  return {worst <= kHarmonicTol && labeled_exact, s.str()};
}

Outcome maximum_principle() {
  Rng rng(202);
  double lo = 0.0, hi = 1.0, sum_err = 0.0;
  for (int g = 0; g < 100; ++g) {
    const Index n = std::uniform_int_distribution<Index>(2, 40)(rng);
    const int c = std::uniform_int_distribution<int>(2, 5)(rng);
    const Matrix w = testing::random_connected_weights(n, rng, 0.15);
    const LabelVector labels = testing::random_labels(n, c, rng);
    const SoftLabelField f = harmonic_solve(graph_from_weights(w), labels, c);
    lo = std::min(lo, f.scores.minCoeff());
    hi = std::max(hi, f.scores.maxCoeff());
    sum_err = std::max(sum_err, (f.scores.rowwise().sum().array() - 1.0).abs().maxCoeff());
  }
  std::ostringstream s;
  s << "score range [" << lo << ", " << hi << "], max |row sum - 1| = " << sum_err;
  return {lo >= -kBoundsSlack && hi <= 1.0 + kBoundsSlack && sum_err <= kRowSumTol, s.str()};
}

// `per_class` labels of every class drawn by seed.
LabelVector stratified_labels(const Dataset& d, Index per_class, std::uint64_t seed) {
  Rng rng(seed);
  LabelVector out(static_cast<std::size_t>(d.size()));
  for (int c = 1; c <= d.class_count; ++c) {
    std::vector<Index> rows;
    for (Index i = 0; i < d.size(); ++i)
      if (d.labels[static_cast<std::size_t>(i)] == c) rows.push_back(i);
    std::shuffle(rows.begin(), rows.end(), rng);
    for (Index k = 0; k < per_class; ++k) out[static_cast<std::size_t>(rows[static_cast<std::size_t>(k)])] = c;
  }
  return out;
}

Outcome anchor_fidelity() {
  double worst = 1.0;
  Index same_total = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset full = gen_four_gaussians(100, kFourGaussianSigma, seed);
    Dataset d = full;
    d.labels = stratified_labels(full, 10, seed + 1000);
    GraphSpec spec;
    spec.kind = GraphKind::Knn;
    spec.k = 10;
    const SoftLabelField dense = harmonic_solve(build_graph(d, spec), d.labels, d.class_count);
    const ClassAnchors anchors = select_class_anchors(d, 3, seed);
    Matrix a(static_cast<Index>(anchors.indices.size()), d.dim());
    for (std::size_t i = 0; i < anchors.indices.size(); ++i) a.row(static_cast<Index>(i)) = d.features.row(anchors.indices[i]);
    const AnchorWeights z = anchor_weights(d.features, a, 3);
    const AnchorPropagation ap = anchor_propagate(z, d.labels, d.class_count, PropagationConfig{});
    Index same = 0;
    for (Index i = 0; i < d.size(); ++i)
      same += ap.field.hardened[static_cast<std::size_t>(i)] == dense.hardened[static_cast<std::size_t>(i)] ? 1 : 0;
    worst = std::min(worst, static_cast<double>(same) / static_cast<double>(d.size()));
    same_total += same;
    total += d.size();
  }
  const double pooled = static_cast<double>(same_total) / static_cast<double>(total);
  std::ostringstream s;
  s << "agreement over all samples of 10 seeds " << pooled << " (need >= " << kAnchorAgreement
    << "), lowest single seed " << worst;
  return {pooled >= kAnchorAgreement, s.str()};
}

Outcome sampling_correctness() {
  Rng rng(404);
  bool ks_ok = true;
  for (int t = 0; t < 50; ++t) {
    const Index n = std::uniform_int_distribution<Index>(5, 60)(rng);
    const Matrix x = testing::random_matrix(n, 3, rng);
    const KsStart start = t % 2 == 0 ? KsStart::MaxPair : KsStart::NearestMean;
    const SamplingPlan p = kennard_stone(x, n, start);
    for (std::size_t i = 1; i < p.audit.size(); ++i)
      if (p.audit[i] > p.audit[i - 1] + kMonotoneSlack) ks_ok = false;
  }
  double km_gap = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Index n = std::uniform_int_distribution<Index>(4, 10)(rng);
    const Matrix x = testing::random_matrix(n, 2, rng);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; s < 10; ++s)
      best = std::min(best, kmeans(x, 2, Metric::SqEuclidean, s).objective);
    km_gap = std::max(km_gap, std::abs(best - testing::exhaustive_two_means(x)));
  }
  double residual = 0.0;
  bool smrs_ok = true;
  for (int t = 0; t < 10; ++t) {
    const Index n = std::uniform_int_distribution<Index>(10, 80)(rng);
    const Matrix x = testing::random_matrix(n, 3, rng);
    SmrsOptions opt;
    const SmrsResult r = smrs(x, opt);
    residual = std::max(residual, r.constraint_residual);
    if (r.constraint_residual > opt.tolerance) smrs_ok = false;
  }
  const Index k = heuristic_cluster_count(2800);
  std::ostringstream s;
  s << "KS monotone " << (ks_ok ? "yes" : "no") << ", k-means gap " << km_gap << ", SMRS residual max " << residual
    << ", k(2800) = " << k;
  return {ks_ok && km_gap <= kKmeansTol && smrs_ok && k == 38, s.str()};
}

bool stages_monotone(const TsvmResult& r) {
  for (const auto& st : r.stages)
    for (std::size_t i = 1; i < st.objective.size(); ++i)
      if (st.objective[i] > st.objective[i - 1] + kMonotoneSlack * std::max(1.0, std::abs(st.objective[i - 1])))
        return false;
  return true;
}

Outcome tsvm_low_density() {
  // Clump A is wide and holds the negative label at its left edge, clump B is
  // narrow; the supervised midpoint falls inside A.
  Rng rng(505);
  std::normal_distribution<double> a(0.0, 0.5), b(3.0, 0.2);
  Matrix unlabeled(100, 1);
  for (Index i = 0; i < 50; ++i) unlabeled(i, 0) = std::clamp(a(rng), -1.0, 1.0);
  for (Index i = 50; i < 100; ++i) unlabeled(i, 0) = std::clamp(b(rng), 2.6, 3.4);
  const double gap_lo = unlabeled.topRows(50).maxCoeff();
  const double gap_hi = unlabeled.bottomRows(50).minCoeff();
  Matrix labeled(2, 1);
  labeled << -1.0, 2.8;
  const Vector y = (Vector(2) << -1.0, 1.0).finished();
  const Vector w = Vector::Ones(2);

  TsvmConfig sup;
  sup.c_star = 0.0;
  sup.anneal_steps = 1;
  const TsvmResult rs = tsvm_train(labeled, y, w, unlabeled, sup);
  TsvmConfig ann;
  const TsvmResult ra = tsvm_train(labeled, y, w, unlabeled, ann);
  const double bs = -rs.model.b / rs.model.w[0];
  const double ba = -ra.model.b / ra.model.w[0];
  const bool sup_out = !(bs > gap_lo && bs < gap_hi);
  const bool ann_in = ba > gap_lo && ba < gap_hi;

  bool monotone = stages_monotone(rs) && stages_monotone(ra);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r2(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix l(6, 2), u(60, 2);
    for (Index i = 0; i < l.rows(); ++i) l.row(i) << n(r2) + (i % 2 ? 2.0 : -2.0), n(r2);
    for (Index i = 0; i < u.rows(); ++i) u.row(i) << n(r2) + (i % 2 ? 2.0 : -2.0), n(r2);
    Vector yy(6);
    for (Index i = 0; i < 6; ++i) yy[i] = i % 2 ? 1.0 : -1.0;
    TsvmConfig cfg;
    cfg.balance = seed % 2 == 1;
    monotone = monotone && stages_monotone(tsvm_train(l, yy, Vector::Ones(6), u, cfg));
  }
  std::ostringstream s;
  s << "gap (" << gap_lo << ", " << gap_hi << "), supervised boundary " << bs << ", annealed boundary " << ba
    << ", per-stage objective non-increasing " << (monotone ? "yes" : "no");
  return {sup_out && ann_in && monotone, s.str()};
}

Outcome metric_identities() {
  Rng rng(606);
  std::uniform_int_distribution<long long> cnt(0, 50);
  bool exact = true;
  for (int t = 0; t < 1000; ++t) {
    const MetricReport m = metrics(confusion_from_counts(cnt(rng), cnt(rng), cnt(rng), cnt(rng)));
    if (m.tpr && m.fnr && *m.tpr + *m.fnr != 1.0) exact = false;
    if (m.spc && m.fpr && *m.spc + *m.fpr != 1.0) exact = false;
    if (m.ppv && m.fdr && *m.ppv + *m.fdr != 1.0) exact = false;
    if (m.tpr.has_value() != m.fnr.has_value() || m.spc.has_value() != m.fpr.has_value() ||
        m.ppv.has_value() != m.fdr.has_value())
      exact = false;
    if (m.f1 && m.ppv && m.tpr && *m.ppv + *m.tpr > 0.0 &&
        std::abs(*m.f1 - 2.0 * *m.ppv * *m.tpr / (*m.ppv + *m.tpr)) > 1e-15)
      exact = false;
  }
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 50)(rng);
    std::vector<double> s(n);
    std::vector<bool> p(n);
    std::uniform_int_distribution<int> level(0, 9);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = level(rng) / 9.0;
      p[i] = i == 0 ? true : i == 1 ? false : level(rng) < 4;
    }
    worst = std::max(worst, std::abs(roc_auc(s, p).auc - testing::pair_counting_auc(s, p)));
  }
  std::ostringstream s;
  s << "identities exact " << (exact ? "yes" : "no") << ", max |AUC - pair count| = " << worst;
  return {exact && worst <= kAucTol, s.str()};
}

Outcome selftrain_routing() {
  // Columns: table row, position. Seeds at 0 and 1000.
  Matrix table(7, 2);
  table << 0.9, 0.1,   // seed class 1
      0.1, 0.9,        // seed class 2
      0.95, 0.05,      // A: confident
      0.6, 0.4,        // B: mid, refinement agrees
      0.4, 0.6,        // C: mid, refinement disagrees
      0.5, 0.45,       // D: low confidence
      0.6, 0.3;        // E: 0.5 confidence, confident once the threshold anneals
  testing::TableClassifier base(table);
  Matrix seed_x(2, 2);
  seed_x << 0, 0, 1, 1000;
  Matrix stream(5, 2);
  stream << 2, 50, 3, 10, 4, -10, 5, 2000, 6, 0;
  int calls = 0;
  OracleContract oracle{[&](Index item) {
                          ++calls;
                          return item == 3 ? 2 : 1;
                        },
                        0};
  SelftrainConfig cfg;
  cfg.passes = 2;
  const SelftrainResult r = selftrain_run(base, seed_x, {1, 2}, 2, stream, oracle, cfg);
  std::vector<int> scen;
  for (const auto& o : r.log.outcomes) scen.push_back(o.scenario);
  const std::vector<int> expected{1, 2, 3, 3, 2, 1, 2, 1};
  std::string why;
  bool conserved = audit_conserved(r.log, 5, 2, 2, &why);

  // Conservation on real runs as well.
  for (std::uint64_t seed = 0; seed < 5 && conserved; ++seed) {
    const Dataset d = gen_four_gaussians(30, kFourGaussianSigma, seed);
    std::vector<Index> seed_rows, stream_rows;
    for (Index i = 0; i < d.size(); ++i) (i % 30 < 3 ? seed_rows : stream_rows).push_back(i);
    const Dataset s = d.subset(seed_rows), u = d.subset(stream_rows);
    std::vector<int> sy;
    for (const auto& l : s.labels) sy.push_back(*l);
    OracleContract truth{[&](Index j) { return *u.labels[static_cast<std::size_t>(j)]; }, 0};
    SelftrainConfig c2;
    c2.seed = seed;
    ClassifierSpec spec;
    spec.k = 3;
    const SelftrainResult rr = selftrain_run(*make_classifier(spec), s.features, sy, 4, u.features, truth, c2);
    conserved = audit_conserved(rr.log, u.size(), s.size(), c2.passes, &why);
  }
  const auto traj = DecisionThresholds{}.trajectory(5);
  const bool endpoints = traj.front() == 0.6 && traj.back() == 0.4;
  std::ostringstream s;
  s << "scenarios";
  for (int v : scen) s << ' ' << v;
  s << ", oracle calls " << calls << "/" << oracle.queries << " (expected 2), trajectory " << traj.front() << " -> "
    << traj.back() << ", conservation " << (conserved ? "holds" : "broken: " + why);
  return {scen == expected && calls == 2 && oracle.queries == 2 && endpoints && conserved, s.str()};
}

Outcome pile_pipeline() {
  PileConfig cfg;
  cfg.descriptors = {WaveDescriptor::MSE, WaveDescriptor::MAE, WaveDescriptor::DIFF};
  cfg.classifiers = {"harmonic"};
  cfg.seeds = {7};
  const PileReport r = run_pile(cfg);
  std::ostringstream s;
  bool ok = r.parts == 4;
  std::map<std::string, double> worst;
  for (const auto& c : r.cells) {
    if (c.failed) {
      s << c.descriptor << " part " << c.part << " failed: " << c.error << "; ";
      if (c.descriptor == "DIFF") ok = false;
      continue;
    }
    auto [it, fresh] = worst.emplace(c.descriptor, c.accuracy);
    if (!fresh) it->second = std::min(it->second, c.accuracy);
  }
  s << "parts " << r.parts << ", observations " << r.observations << ", min per-part accuracy:";
  for (const auto& [desc, acc] : worst) s << ' ' << desc << '=' << acc;
  s << " (DIFF needs >= " << kPileAccuracy << ")";
  ok = ok && worst.count("DIFF") && worst["DIFF"] >= kPileAccuracy;
  return {ok, s.str()};
}

double precision_at(const RankingResult& r, const Dataset& d, int cls) {
  Index hit = 0;
  for (Index i : r.retrieved) hit += d.labels[static_cast<std::size_t>(i)] == cls ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(r.retrieved.size());
}

Outcome dml_ranking() {
  const Dataset d = gen_four_gaussians(100, kFourGaussianSigma, 9);
  Rng rng(909);
  std::vector<Index> pos_pool, neg_pool;
  for (Index i = 0; i < d.size(); ++i) (d.labels[static_cast<std::size_t>(i)] == 1 ? pos_pool : neg_pool).push_back(i);
  std::shuffle(pos_pool.begin(), pos_pool.end(), rng);
  std::shuffle(neg_pool.begin(), neg_pool.end(), rng);
  const std::vector<Index> pos(pos_pool.begin(), pos_pool.begin() + 6);
  const std::vector<Index> neg(neg_pool.begin(), neg_pool.begin() + 18);
  ConstraintSets cs;
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j) cs.similar.emplace_back(pos[i], pos[j]);
  for (Index p : pos)
    for (Index q : neg) cs.dissimilar.emplace_back(p, q);
  std::vector<int> pr(6), nr(18);
  for (int i = 0; i < 6; ++i) pr[static_cast<std::size_t>(i)] = i + 1;
  for (int i = 0; i < 18; ++i) nr[static_cast<std::size_t>(i)] = i + 1;
  const FeedbackWeights fw = feedback_weights(pr, nr);

  DmlConfig cfg;
  const double cap = static_cast<double>(d.dim());
  bool invariants = true;
  const DmlResult fit = dml_fit(d.features, cs, cfg, [&](const MetricMatrix& m) {
    try {
      m.validate(cap);
    } catch (const ValidationError&) {
      invariants = false;
    }
  });
  const double base = precision_at(rank_images(d.features, pos, neg, fw, MetricMatrix::identity(d.dim())), d, 1);
  const double learned = precision_at(rank_images(d.features, pos, neg, fw, fit.metric), d, 1);
  std::ostringstream s;
  s << "precision@16 Euclidean " << base << ", learned " << learned << " (need >= " << kPrecisionRatio
    << "x), iterations " << fit.iterations << ", PSD/trace invariants " << (invariants ? "hold" : "broken");
  return {invariants && learned >= kPrecisionRatio * base, s.str()};
}

Outcome end_to_end() {
  const std::string text = R"({
    "dataset": {"generator": "imbalanced", "n": 2000, "minority_fraction": 0.05, "seed": 10},
    "strategies": ["all"],
    "classifiers": ["knn", "linreg", "tsvm"],
    "seeds": [0, 1, 2]
  })";
  const ExperimentReport r = run_experiment(parse_experiment_config(text));
  const std::string csv = cells_to_csv(r);
  const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  Index failed = 0;
  for (const auto& c : r.cells) failed += c.failed ? 1 : 0;
  std::ostringstream s;
  s << "cells " << r.cells.size() << " (csv rows " << rows << "), failed " << failed << ", leakage violations "
    << r.leakage.size();
  return {r.cells.size() == 63 && rows == 63 && failed == 0 && r.leakage.empty(), s.str()};
}

}  // namespace

// Usage: semisup_acceptance [--known-failure N]...
// A known failure still prints FAIL but does not change the exit status.
int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--known-failure") known.insert(std::atoi(argv[++i]));

  const std::vector<Criterion> criteria{
      {1, "harmonic oracle equivalence", 5.0, harmonic_oracle},
      {2, "maximum principle and row sums", 5.0, maximum_principle},
      {3, "anchor-graph fidelity", 30.0, anchor_fidelity},
      {4, "sampling correctness", 60.0, sampling_correctness},
      {5, "TSVM low-density boundary", 30.0, tsvm_low_density},
      {6, "metric identities and AUC", 5.0, metric_identities},
      {7, "self-training routing", 5.0, selftrain_routing},
      {8, "pile pipeline", 60.0, pile_pipeline},
      {9, "DML ranking", 60.0, dml_ranking},
      {10, "end-to-end benchmark", 300.0, end_to_end},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    const bool excused = !pass && known.count(c.id) > 0;
    failures += pass || excused ? 0 : 1;
    std::printf("criterion %d: %s - %s; %s; %.2fs (limit %.0fs)%s\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.limit_seconds, excused ? " [known failure]" : "");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
