#include "cli.hpp"

#include <semisup/classify.hpp>
#include <semisup/eval.hpp>
#include <semisup/experiment.hpp>
#include <semisup/metriclearn.hpp>
#include <semisup/pile.hpp>
#include <semisup/propagation.hpp>
#include <semisup/sampling.hpp>
#include <semisup/selftrain.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace semisup::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Configuration file (JSON)");
  app->add_option("--seed", c.seed, "Seed for every random choice");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
}

std::uint64_t seed_of(const Common& c) { return c.seed.value_or(0); }

fs::path out_dir(const Common& c) {
  fs::create_directories(c.out);
  return fs::path(c.out);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << body;
}

struct DataArgs {
  std::string path;
  std::string label_column = "label";
  std::string id_column = "sample_id";
  std::string unlabeled_marker = "?";
};

void add_data(CLI::App* app, DataArgs& d) {
  app->add_option("--data", d.path, "Dataset CSV")->required();
  app->add_option("--label-column", d.label_column)->capture_default_str();
  app->add_option("--id-column", d.id_column)->capture_default_str();
  app->add_option("--unlabeled-marker", d.unlabeled_marker)->capture_default_str();
}

Dataset load(const DataArgs& a) {
  CsvOptions o;
  o.label_column = a.label_column;
  o.id_column = a.id_column;
  o.unlabeled_marker = a.unlabeled_marker;
  return load_csv(a.path, o);
}

// ---- gen ----
struct GenArgs {
  Common common;
  std::string dataset = "four-gauss";
  Index n = 400;
  double sigma = kFourGaussianSigma;
  double minority_fraction = 0.05;
  Index dim = 4;
  double labeled_fraction = 1.0;
};

// Keeps a seeded per-class share of labels and marks the rest unlabeled.
void hide_labels(Dataset& d, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::map<int, std::vector<Index>> by_class;
  for (Index i = 0; i < d.size(); ++i)
    if (d.labels[static_cast<std::size_t>(i)]) by_class[*d.labels[static_cast<std::size_t>(i)]].push_back(i);
  for (auto& [c, rows] : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * static_cast<double>(rows.size()))));
    for (std::size_t r = keep; r < rows.size(); ++r) d.labels[static_cast<std::size_t>(rows[r])].reset();
  }
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  if (!(a.labeled_fraction > 0.0 && a.labeled_fraction <= 1.0))
    throw ValidationError("gen: --labeled-fraction must lie in (0, 1]");
  const auto dir = out_dir(a.common);
  const auto seed = seed_of(a.common);
  if (a.dataset == "pile") {
    EchoConfig cfg = default_echo_config();
    if (!a.common.config.empty()) cfg = parse_pile_config(read_file(a.common.config)).echo;
    save_waveforms(gen_pile_waveforms(cfg, seed), dir / "pile");
    out << "wrote " << (dir / "pile_meta.csv").string() << " and " << (dir / "pile_signals.csv").string() << "\n";
    return 0;
  }
  Dataset d;
  if (a.dataset == "four-gauss") {
    if (a.n < 4 || a.n % 4 != 0) throw ValidationError("gen: --n must be a positive multiple of 4 for four-gauss");
    d = gen_four_gaussians(a.n / 4, a.sigma, seed);
  } else if (a.dataset == "imbalanced") {
    ImbalancedConfig c;
    c.n = a.n;
    c.minority_fraction = a.minority_fraction;
    c.dim = a.dim;
    d = gen_imbalanced(c, seed);
  } else {
    throw ValidationError("gen: unknown dataset '" + a.dataset + "' (four-gauss, imbalanced, pile)");
  }
  hide_labels(d, a.labeled_fraction, seed);
  const auto path = dir / (a.dataset + ".csv");
  save_csv(d, path);
  out << "wrote " << path.string() << " (" << d.size() << " rows)\n";
  return 0;
}

// ---- sample ----
struct SampleArgs {
  Common common;
  DataArgs data;
  std::string strategy = "KENSTONE";
  double fraction = 0.4;
  std::optional<Index> budget;
  std::optional<Index> minpts;
  Index window = 3;
  double alpha = 0.5;
  std::string augment = "minority";
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  StrategySpec spec;
  if (!a.common.config.empty()) {
    const json j = json::parse(read_file(a.common.config), nullptr, false);
    if (j.is_discarded()) throw ParseError("sample: config is not valid JSON");
    spec = parse_experiment_config(json{{"strategies", json::array({j})}, {"classifiers", {"knn"}}, {"seeds", {0}}}.dump())
               .strategies.front();
  } else {
    spec.strategy = parse_strategy(a.strategy);
    spec.random_fraction = a.fraction;
    spec.budget = a.budget;
    spec.minpts = a.minpts;
    spec.window = a.window;
    spec.smrs.alpha = a.alpha;
    spec.augment = parse_augment_policy(a.augment);
  }
  spec.seed = seed_of(a.common);
  const Dataset d = apply_minmax(fit_minmax(load(a.data)), load(a.data));
  const SamplingPlan plan = sample(d, spec);
  const auto dir = out_dir(a.common);
  const auto path = dir / ("plan_" + to_string(spec.strategy) + "_" + std::to_string(spec.seed) + ".csv");
  save_plan(plan, d, path);
  write_file(dir / "plan_summary.json", plan_summary_json(plan, d));
  for (const auto& w : plan.warnings) out << "warning: " << w << "\n";
  out << "selected " << plan.selected.size() << " of " << d.size() << " -> " << path.string() << "\n";
  return 0;
}

// ---- propagate ----
struct PropagateArgs {
  Common common;
  DataArgs data;
  std::string method = "harmonic";
  std::string graph = "knn";
  Index k = 5;
  double epsilon = 0.0;
  std::optional<double> sigma;
  Index beta = 3;
  Index s = 3;
  double gamma = 1.0;
  double lambda1 = 1e-3;
  double lambda2 = 1.0;
};

int cmd_propagate(const PropagateArgs& a, std::ostream& out) {
  const Dataset d = load(a.data);
  const auto dir = out_dir(a.common);
  SoftLabelField field;
  PropagationConfig pc;
  pc.gamma = a.gamma;
  pc.lambda1 = a.lambda1;
  pc.lambda2 = a.lambda2;
  pc.validate();
  if (a.method == "anchor") {
    const auto anchors = select_class_anchors(d, a.beta, seed_of(a.common));
    Matrix anchor_points(static_cast<Index>(anchors.indices.size()), d.dim());
    for (std::size_t i = 0; i < anchors.indices.size(); ++i) anchor_points.row(static_cast<Index>(i)) = d.features.row(anchors.indices[i]);
    const auto z = anchor_weights(d.features, anchor_points, std::min<Index>(a.s, anchor_points.rows()));
    field = anchor_propagate(z, d.labels, d.class_count, pc).field;
  } else {
    GraphSpec g;
    g.kind = parse_graph_kind(a.graph);
    g.k = a.k;
    g.epsilon = a.epsilon;
    g.sigma = a.sigma;
    const Graph graph = build_graph(d, g);
    for (const auto& w : graph.warnings) out << "warning: " << w << "\n";
    save_edge_list(graph, dir / "edges.csv");
    if (a.method == "harmonic")
      field = harmonic_solve(graph, d.labels, d.class_count);
    else if (a.method == "regularized")
      field = regularized_solve(graph, d.labels, d.class_count, pc);
    else
      throw ValidationError("propagate: unknown method '" + a.method + "' (harmonic, regularized, anchor)");
  }
  for (const auto& w : field.warnings) out << "warning: " << w << "\n";
  save_soft_labels(field, d.sample_ids, dir / "soft_labels.csv");
  out << "wrote " << (dir / "soft_labels.csv").string() << "\n";
  return 0;
}

// ---- train ----
struct TrainArgs {
  Common common;
  DataArgs data;
  std::string classifier = "tsvm";
  Index k = 5;
  double c = 1.0;
  double c_star = 0.1;
  int anneal_steps = 5;
  bool balance = false;
  std::optional<double> rho;
  Index dims = 2;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const Dataset d = load(a.data);
  const auto dir = out_dir(a.common);
  TsvmConfig tc;
  tc.c = a.c;
  tc.c_star = a.c_star;
  tc.anneal_steps = a.anneal_steps;
  tc.balance = a.balance;
  SoftLabelField field;
  if (a.rho) {
    if (a.classifier != "tsvm") throw ValidationError("train: --rho applies to the tsvm classifier only");
    const auto m = embed_and_train(d, *a.rho, a.dims, tc);
    save_linear(m.classifier, dir / "model.txt");
    field = m.field;
  } else {
    const auto lab = d.labeled_indices();
    const auto unl = d.unlabeled_indices();
    Matrix x(static_cast<Index>(lab.size()), d.dim()), u(static_cast<Index>(unl.size()), d.dim());
    std::vector<int> y;
    for (std::size_t i = 0; i < lab.size(); ++i) {
      x.row(static_cast<Index>(i)) = d.features.row(lab[i]);
      y.push_back(*d.labels[static_cast<std::size_t>(lab[i])]);
    }
    for (std::size_t i = 0; i < unl.size(); ++i) u.row(static_cast<Index>(i)) = d.features.row(unl[i]);
    const Vector w = Vector::Ones(x.rows());
    if (a.classifier == "knn") {
      KnnModel m{x, y, d.class_count, std::min<Index>(a.k, x.rows())};
      field = knn_predict(m, d.features);
    } else {
      const LinearClassifier m = a.classifier == "linreg" ? linreg_fit_multiclass(x, y, d.class_count, w)
                               : a.classifier == "tsvm"   ? tsvm_fit_multiclass(x, y, d.class_count, w, u, tc)
                                                          : throw ValidationError("train: unknown classifier '" + a.classifier + "'");
      save_linear(m, dir / "model.txt");
      field = make_field(m.scores(d.features));
    }
  }
  save_soft_labels(field, d.sample_ids, dir / "predictions.csv");
  out << "wrote " << (dir / "predictions.csv").string() << "\n";
  return 0;
}

// ---- selftrain ----
struct SelftrainArgs {
  Common common;
  DataArgs data;
  std::string classifier = "knn";
  Index k = 5;
  int passes = 5;
  double high = 0.6;
  double low = 0.2;
  double final_high = 0.4;
  double seed_fraction = 0.1;
};

int cmd_selftrain(const SelftrainArgs& a, std::ostream& out) {
  const Dataset d = load(a.data);
  if (!d.unlabeled_indices().empty())
    throw ValidationError("selftrain: the demo needs fully labeled data (labels act as the oracle)");
  const auto seed = seed_of(a.common);
  Rng rng(seed);
  std::map<int, std::vector<Index>> by_class;
  for (Index i = 0; i < d.size(); ++i) by_class[*d.labels[static_cast<std::size_t>(i)]].push_back(i);
  std::set<Index> seed_rows;
  for (auto& [c, rows] : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(a.seed_fraction * static_cast<double>(rows.size()))));
    seed_rows.insert(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(m));
  }
  Matrix sx(static_cast<Index>(seed_rows.size()), d.dim());
  std::vector<int> sy;
  std::vector<Index> stream_rows;
  Index r = 0;
  for (Index i = 0; i < d.size(); ++i) {
    if (seed_rows.count(i)) {
      sx.row(r++) = d.features.row(i);
      sy.push_back(*d.labels[static_cast<std::size_t>(i)]);
    } else {
      stream_rows.push_back(i);
    }
  }
  Matrix stream(static_cast<Index>(stream_rows.size()), d.dim());
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < stream_rows.size(); ++i) {
    stream.row(static_cast<Index>(i)) = d.features.row(stream_rows[i]);
    ids.push_back(d.sample_ids[static_cast<std::size_t>(stream_rows[i])]);
  }
  ClassifierSpec cs;
  cs.kind = a.classifier;
  cs.k = a.k;
  const auto base = make_classifier(cs);
  OracleContract oracle;
  oracle.label = [&](Index item) { return *d.labels[static_cast<std::size_t>(stream_rows[static_cast<std::size_t>(item)])]; };
  SelftrainConfig cfg;
  cfg.thresholds = {a.high, a.low, a.final_high};
  cfg.passes = a.passes;
  cfg.seed = seed;
  const auto res = selftrain_run(*base, sx, sy, d.class_count, stream, oracle, cfg, ids);
  const auto dir = out_dir(a.common);
  save_audit(res.log, dir / "audit.csv");
  Index correct = 0;
  for (std::size_t j = 0; j < stream_rows.size(); ++j) {
    const auto& p = res.pseudo[j];
    if (p && *p == *d.labels[static_cast<std::size_t>(stream_rows[j])]) ++correct;
  }
  json s;
  s["passes"] = a.passes;
  s["oracle_queries"] = oracle.queries;
  s["thresholds"] = res.log.thresholds;
  s["seed_pool_sizes"] = res.log.seed_pool_sizes;
  s["pseudo_pool_sizes"] = res.log.pseudo_pool_sizes;
  s["pseudo_correct"] = correct;
  write_file(dir / "selftrain_summary.json", s.dump(2) + "\n");
  out << "oracle queries " << oracle.queries << ", audit -> " << (dir / "audit.csv").string() << "\n";
  return 0;
}

// ---- rank ----
struct RankArgs {
  Common common;
  DataArgs data;
  std::string positive;
  std::string negative;
  Index top_n = 16;
  bool learn = false;
  double gamma_s = 1.0;
  double gamma_d = 1.0;
  Index k = 5;
  double trace_cap = 0.0;
};

std::vector<Index> resolve_ids(const Dataset& d, const std::string& list, const char* what) {
  std::map<std::string, Index> pos;
  for (Index i = 0; i < d.size(); ++i) pos[d.sample_ids[static_cast<std::size_t>(i)]] = i;
  std::vector<Index> out;
  std::stringstream ss(list);
  std::string id;
  while (std::getline(ss, id, ',')) {
    if (id.empty()) continue;
    const auto it = pos.find(id);
    if (it == pos.end()) throw ValidationError(std::string("rank: unknown ") + what + " sample id '" + id + "'");
    out.push_back(it->second);
  }
  if (out.empty()) throw ValidationError(std::string("rank: no ") + what + " sample ids given");
  return out;
}

std::vector<int> ranks_of(std::size_t n) {
  std::vector<int> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<int>(i + 1);
  return r;
}

int cmd_rank(const RankArgs& a, std::ostream& out) {
  const Dataset d = load(a.data);
  const auto p = resolve_ids(d, a.positive, "positive");
  const auto n = resolve_ids(d, a.negative, "negative");
  const auto dir = out_dir(a.common);
  MetricMatrix metric = MetricMatrix::identity(d.dim());
  if (a.learn) {
    ConstraintSets cs;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) cs.similar.emplace_back(p[i], p[j]);
    for (const Index i : p)
      for (const Index j : n) cs.dissimilar.emplace_back(i, j);
    DmlConfig dc;
    dc.gamma_s = a.gamma_s;
    dc.gamma_d = a.gamma_d;
    dc.k = a.k;
    dc.trace_cap = a.trace_cap;
    metric = dml_fit(d.features, cs, dc).metric;
    save_metric(metric, dir / "metric.csv");
  }
  const auto res = rank_images(d.features, p, n, feedback_weights(ranks_of(p.size()), ranks_of(n.size())), metric, a.top_n);
  write_file(dir / "ranking.csv", ranking_to_csv(res, d.sample_ids));
  out << "retrieved " << res.retrieved.size() << " (threshold " << format_real(res.threshold) << ") -> "
      << (dir / "ranking.csv").string() << "\n";
  return 0;
}

// ---- bench / pile ----
json config_json(const Common& c) {
  json j = json::parse(read_file(c.config), nullptr, false);
  if (j.is_discarded()) throw ParseError("config '" + c.config + "' is not valid JSON");
  if (!j.is_object()) throw ValidationError("config '" + c.config + "' must hold a JSON object");
  return j;
}

int cmd_bench(const Common& c, bool out_given, std::ostream& out) {
  if (c.config.empty()) throw ValidationError("bench: --config is required");
  json j = config_json(c);
  if (c.seed) {
    if (!j.contains("seeds")) j["seeds"] = {*c.seed};
    if (j.contains("dataset") && j["dataset"].is_object() && !j["dataset"].contains("seed")) j["dataset"]["seed"] = *c.seed;
  }
  if (out_given || !j.contains("out")) j["out"] = fs::absolute(c.out).string();
  const auto cfg = parse_experiment_config(j.dump(), fs::path(c.config).parent_path());
  const auto report = run_experiment(cfg);
  std::size_t failed = 0;
  for (const auto& cell : report.cells) failed += cell.failed ? 1 : 0;
  out << report.cells.size() << " cells (" << failed << " failed), leakage violations " << report.leakage.size()
      << " -> " << cfg.out_dir->string() << "\n";
  if (!report.leakage.empty()) throw RuntimeError("bench: evaluation rows leaked into a training plan");
  return 0;
}

int cmd_pile(const Common& c, bool out_given, std::ostream& out) {
  json j = c.config.empty() ? json::object() : config_json(c);
  if (c.seed) j["seeds"] = {*c.seed};
  if (out_given || !j.contains("out")) j["out"] = fs::absolute(c.out).string();
  const auto cfg = parse_pile_config(j.dump(), c.config.empty() ? fs::path() : fs::path(c.config).parent_path());
  const auto report = run_pile(cfg);
  out << pile_table_csv(report);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-based semi-supervised learning toolkit", "semisup"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic dataset");
  add_common(g, gen.common);
  g->add_option("--dataset", gen.dataset, "four-gauss | imbalanced | pile")->capture_default_str();
  g->add_option("--n", gen.n, "Total number of samples")->capture_default_str();
  g->add_option("--sigma", gen.sigma, "Four-Gaussian spread")->capture_default_str();
  g->add_option("--minority-fraction", gen.minority_fraction)->capture_default_str();
  g->add_option("--dim", gen.dim)->capture_default_str();
  g->add_option("--labeled-fraction", gen.labeled_fraction, "Share of labels kept per class")->capture_default_str();

  SampleArgs smp;
  auto* s = app.add_subcommand("sample", "Select a representative training subset");
  add_common(s, smp.common);
  add_data(s, smp.data);
  s->add_option("--strategy", smp.strategy)->capture_default_str();
  s->add_option("--fraction", smp.fraction, "Random share (and Kennard-Stone default budget)")->capture_default_str();
  s->add_option("--budget", smp.budget);
  s->add_option("--minpts", smp.minpts);
  s->add_option("--window", smp.window)->capture_default_str();
  s->add_option("--alpha", smp.alpha)->capture_default_str();
  s->add_option("--augment", smp.augment, "minority | majority | none")->capture_default_str();

  PropagateArgs prop;
  auto* p = app.add_subcommand("propagate", "Propagate labels over a graph");
  add_common(p, prop.common);
  add_data(p, prop.data);
  p->add_option("--method", prop.method, "harmonic | regularized | anchor")->capture_default_str();
  p->add_option("--graph", prop.graph, "knn | full | eps")->capture_default_str();
  p->add_option("--k", prop.k)->capture_default_str();
  p->add_option("--epsilon", prop.epsilon)->capture_default_str();
  p->add_option("--sigma", prop.sigma);
  p->add_option("--beta", prop.beta, "Anchors per class")->capture_default_str();
  p->add_option("--s", prop.s, "Anchors per sample")->capture_default_str();
  p->add_option("--gamma", prop.gamma)->capture_default_str();
  p->add_option("--lambda1", prop.lambda1)->capture_default_str();
  p->add_option("--lambda2", prop.lambda2)->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train kNN, least-squares or TSVM models");
  add_common(t, tr.common);
  add_data(t, tr.data);
  t->add_option("--classifier", tr.classifier, "knn | linreg | tsvm")->capture_default_str();
  t->add_option("--k", tr.k)->capture_default_str();
  t->add_option("--C", tr.c)->capture_default_str();
  t->add_option("--C-star", tr.c_star)->capture_default_str();
  t->add_option("--anneal-steps", tr.anneal_steps)->capture_default_str();
  t->add_flag("--balance", tr.balance);
  t->add_option("--rho", tr.rho, "Train in the rho-path MDS embedding");
  t->add_option("--dims", tr.dims, "Embedding dimension")->capture_default_str();

  SelftrainArgs st;
  auto* sf = app.add_subcommand("selftrain", "Self-training with a simulated oracle");
  add_common(sf, st.common);
  add_data(sf, st.data);
  sf->add_option("--classifier", st.classifier)->capture_default_str();
  sf->add_option("--k", st.k)->capture_default_str();
  sf->add_option("--passes", st.passes)->capture_default_str();
  sf->add_option("--high", st.high)->capture_default_str();
  sf->add_option("--low", st.low)->capture_default_str();
  sf->add_option("--final-high", st.final_high)->capture_default_str();
  sf->add_option("--seed-fraction", st.seed_fraction)->capture_default_str();

  RankArgs rk;
  auto* r = app.add_subcommand("rank", "Relevance-feedback ranking");
  add_common(r, rk.common);
  add_data(r, rk.data);
  r->add_option("--positive", rk.positive, "Comma-separated relevant sample ids")->required();
  r->add_option("--negative", rk.negative, "Comma-separated irrelevant sample ids")->required();
  r->add_option("--top-n", rk.top_n)->capture_default_str();
  r->add_flag("--learn", rk.learn, "Learn a metric from the feedback first");
  r->add_option("--gamma-s", rk.gamma_s)->capture_default_str();
  r->add_option("--gamma-d", rk.gamma_d)->capture_default_str();
  r->add_option("--k", rk.k)->capture_default_str();
  r->add_option("--trace-cap", rk.trace_cap)->capture_default_str();

  Common bench;
  auto* b = app.add_subcommand("bench", "Run a strategy x classifier x seed experiment");
  add_common(b, bench);
  Common pile;
  auto* pl = app.add_subcommand("pile", "Run the pile integrity pipeline");
  add_common(pl, pile);

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (s->parsed()) return cmd_sample(smp, out);
    if (p->parsed()) return cmd_propagate(prop, out);
    if (t->parsed()) return cmd_train(tr, out);
    if (sf->parsed()) return cmd_selftrain(st, out);
    if (r->parsed()) return cmd_rank(rk, out);
    if (b->parsed()) return cmd_bench(bench, b->count("--out") > 0, out);
    if (pl->parsed()) return cmd_pile(pile, pl->count("--out") > 0, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace semisup::cli
