#include "semisup/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace semisup {

using nlohmann::json;

Dataset load_source(const DatasetSource& src) {
  if (src.csv) return load_csv(*src.csv, src.csv_options);
  if (src.generator == "imbalanced") return gen_imbalanced(src.imbalanced, src.seed);
  if (src.generator == "four-gauss") return gen_four_gaussians(src.per_class, kFourGaussianSigma, src.seed);
  throw ValidationError("unknown dataset generator '" + src.generator + "' (expected imbalanced or four-gauss)");
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw ValidationError("experiment: at least one strategy is required");
  if (classifiers.empty()) throw ValidationError("experiment: at least one classifier is required");
  if (seeds.empty()) throw ValidationError("experiment: at least one seed is required");
  if (split.kind == SplitKind::Holdout && !(split.holdout > 0.0 && split.holdout < 1.0))
    throw ValidationError("experiment: holdout fraction must lie in (0, 1)");
  if (split.kind == SplitKind::Period) {
    if (split.period_column.empty()) throw ValidationError("experiment: period split needs a period_column");
    if (!dataset.csv) throw ValidationError("experiment: period split needs a CSV dataset");
  }
  for (const auto& c : classifiers) make_classifier(c);
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ValidationError(where + ": unknown key '" + k + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config: key '") + key + "' has the wrong type");
  }
}

DatasetSource parse_dataset(const json& j, const std::filesystem::path& base) {
  check_keys(j,
             {"csv", "label_column", "id_column", "unlabeled_marker", "ignore_columns", "generator", "n",
              "minority_fraction", "dim", "separation", "sigma", "per_class", "seed"},
             "dataset");
  DatasetSource s;
  if (j.contains("csv")) {
    std::filesystem::path p = get_or<std::string>(j, "csv", "");
    s.csv = p.is_relative() && !base.empty() ? base / p : p;
  }
  s.csv_options.label_column = get_or<std::string>(j, "label_column", s.csv_options.label_column);
  s.csv_options.id_column = get_or<std::string>(j, "id_column", s.csv_options.id_column);
  s.csv_options.unlabeled_marker = get_or<std::string>(j, "unlabeled_marker", s.csv_options.unlabeled_marker);
  s.csv_options.ignore_columns = get_or<std::vector<std::string>>(j, "ignore_columns", {});
  s.generator = get_or<std::string>(j, "generator", s.generator);
  s.imbalanced.n = get_or<Index>(j, "n", s.imbalanced.n);
  s.imbalanced.minority_fraction = get_or<double>(j, "minority_fraction", s.imbalanced.minority_fraction);
  s.imbalanced.dim = get_or<Index>(j, "dim", s.imbalanced.dim);
  s.imbalanced.separation = get_or<double>(j, "separation", s.imbalanced.separation);
  s.imbalanced.sigma = get_or<double>(j, "sigma", s.imbalanced.sigma);
  s.per_class = get_or<Index>(j, "per_class", s.per_class);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  return s;
}

StrategySpec parse_strategy_spec(const json& j) {
  StrategySpec s;
  if (j.is_string()) {
    s.strategy = parse_strategy(j.get<std::string>());
    return s;
  }
  check_keys(j,
             {"name", "random_fraction", "budget", "start", "minpts", "epsilon", "window", "alpha", "tolerance",
              "max_iterations", "row_threshold", "penalty", "augment"},
             "strategy");
  if (!j.contains("name")) throw ValidationError("strategy: 'name' is required");
  s.strategy = parse_strategy(j.at("name").get<std::string>());
  s.random_fraction = get_or<double>(j, "random_fraction", s.random_fraction);
  if (j.contains("budget")) s.budget = get_or<Index>(j, "budget", 0);
  const std::string start = get_or<std::string>(j, "start", "max-pair");
  if (start == "max-pair")
    s.ks_start = KsStart::MaxPair;
  else if (start == "nearest-mean")
    s.ks_start = KsStart::NearestMean;
  else
    throw ValidationError("strategy: start must be max-pair or nearest-mean");
  if (j.contains("minpts")) s.minpts = get_or<Index>(j, "minpts", 0);
  s.epsilon = get_or<double>(j, "epsilon", s.epsilon);
  s.window = get_or<Index>(j, "window", s.window);
  s.smrs.alpha = get_or<double>(j, "alpha", s.smrs.alpha);
  s.smrs.tolerance = get_or<double>(j, "tolerance", s.smrs.tolerance);
  s.smrs.max_iterations = get_or<int>(j, "max_iterations", s.smrs.max_iterations);
  s.smrs.row_threshold = get_or<double>(j, "row_threshold", s.smrs.row_threshold);
  s.smrs.penalty = get_or<double>(j, "penalty", s.smrs.penalty);
  s.augment = parse_augment_policy(get_or<std::string>(j, "augment", "minority"));
  if (!(s.random_fraction > 0.0 && s.random_fraction <= 1.0))
    throw ValidationError("strategy: random_fraction must lie in (0, 1]");
  return s;
}

ClassifierSpec parse_classifier_spec(const json& j) {
  ClassifierSpec c;
  if (j.is_string()) {
    c.kind = j.get<std::string>();
    return c;
  }
  check_keys(j,
             {"kind", "k", "metric", "C", "C_star", "anneal_steps", "max_inner_steps", "gradient_tolerance", "balance"},
             "classifier");
  c.kind = get_or<std::string>(j, "kind", c.kind);
  c.k = get_or<Index>(j, "k", c.k);
  c.metric = parse_metric(get_or<std::string>(j, "metric", to_string(c.metric)));
  c.tsvm.c = get_or<double>(j, "C", c.tsvm.c);
  c.tsvm.c_star = get_or<double>(j, "C_star", c.tsvm.c_star);
  c.tsvm.anneal_steps = get_or<int>(j, "anneal_steps", c.tsvm.anneal_steps);
  c.tsvm.max_inner_steps = get_or<int>(j, "max_inner_steps", c.tsvm.max_inner_steps);
  c.tsvm.gradient_tolerance = get_or<double>(j, "gradient_tolerance", c.tsvm.gradient_tolerance);
  c.tsvm.balance = get_or<bool>(j, "balance", c.tsvm.balance);
  return c;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  check_keys(j, {"dataset", "strategies", "classifiers", "seeds", "class_weights", "split", "positive_class", "out"},
             "config");
  ExperimentConfig cfg;
  if (j.contains("dataset")) cfg.dataset = parse_dataset(j.at("dataset"), base_dir);
  if (j.contains("strategies")) {
    for (const auto& s : j.at("strategies")) {
      if (s.is_string() && s.get<std::string>() == "all") {
        for (const Strategy st : all_strategies()) {
          StrategySpec spec;
          spec.strategy = st;
          cfg.strategies.push_back(spec);
        }
      } else {
        cfg.strategies.push_back(parse_strategy_spec(s));
      }
    }
  }
  if (j.contains("classifiers"))
    for (const auto& c : j.at("classifiers")) cfg.classifiers.push_back(parse_classifier_spec(c));
  cfg.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {});
  const std::string cw = get_or<std::string>(j, "class_weights", "balanced");
  if (cw == "balanced")
    cfg.class_weights = ClassWeightPolicy::Balanced;
  else if (cw == "none")
    cfg.class_weights = ClassWeightPolicy::None;
  else
    throw ValidationError("config: class_weights must be balanced or none");
  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, {"holdout", "period_column", "evaluate_period"}, "split");
    if (s.contains("period_column")) {
      cfg.split.kind = SplitKind::Period;
      cfg.split.period_column = s.at("period_column").get<std::string>();
      if (s.contains("evaluate_period")) cfg.split.evaluate_period = s.at("evaluate_period").get<double>();
    } else {
      cfg.split.holdout = get_or<double>(s, "holdout", cfg.split.holdout);
    }
  }
  if (j.contains("positive_class")) cfg.positive_class = get_or<int>(j, "positive_class", 1);
  if (j.contains("out")) {
    std::filesystem::path p = j.at("out").get<std::string>();
    cfg.out_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (cfg.split.kind == SplitKind::Period &&
      std::find(cfg.dataset.csv_options.ignore_columns.begin(), cfg.dataset.csv_options.ignore_columns.end(),
                cfg.split.period_column) == cfg.dataset.csv_options.ignore_columns.end())
    cfg.dataset.csv_options.ignore_columns.push_back(cfg.split.period_column);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

namespace {

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

Split holdout_split(const Dataset& d, double fraction, std::uint64_t seed) {
  Rng rng(seed);
  Split s;
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(d.class_count) + 1);
  for (Index i = 0; i < d.size(); ++i) {
    const auto& l = d.labels[static_cast<std::size_t>(i)];
    by_class[l ? static_cast<std::size_t>(*l) : 0].push_back(i);
  }
  // Unlabeled rows can only help training; labeled rows are split per class.
  s.train = by_class[0];
  for (std::size_t c = 1; c < by_class.size(); ++c) {
    auto& rows = by_class[c];
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto m = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(rows.size())));
    s.test.insert(s.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(m));
    s.train.insert(s.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(m), rows.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Split period_split(const Dataset& d, const ExperimentConfig& cfg) {
  const auto raw = read_csv_column(*cfg.dataset.csv, cfg.split.period_column);
  if (static_cast<Index>(raw.size()) != d.size())
    throw ValidationError("period column length does not match the dataset");
  std::vector<double> period;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    try {
      period.push_back(std::stod(raw[i]));
    } catch (const std::exception&) {
      throw ParseError("period column '" + cfg.split.period_column + "', row " + std::to_string(i + 2) +
                       ": not a number");
    }
  }
  const double eval = cfg.split.evaluate_period ? *cfg.split.evaluate_period
                                                : *std::max_element(period.begin(), period.end());
  Split s;
  for (Index i = 0; i < d.size(); ++i) {
    const double p = period[static_cast<std::size_t>(i)];
    if (p < eval)
      s.train.push_back(i);
    else if (p == eval && d.labels[static_cast<std::size_t>(i)])
      s.test.push_back(i);
  }
  if (s.train.empty() || s.test.empty())
    throw ValidationError("period split leaves an empty training or evaluation set");
  return s;
}

std::vector<int> hard_labels(const Dataset& d, const std::vector<Index>& rows) {
  std::vector<int> y;
  for (const Index i : rows) y.push_back(*d.labels[static_cast<std::size_t>(i)]);
  return y;
}

Vector class_weights(const std::vector<int>& y, int class_count, ClassWeightPolicy policy) {
  Vector w = Vector::Ones(static_cast<Index>(y.size()));
  if (policy == ClassWeightPolicy::None || y.empty()) return w;
  std::vector<double> count(static_cast<std::size_t>(class_count) + 1, 0.0);
  for (const int l : y) count[static_cast<std::size_t>(l)] += 1.0;
  int present = 0;
  for (int c = 1; c <= class_count; ++c) present += count[static_cast<std::size_t>(c)] > 0.0 ? 1 : 0;
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    w[static_cast<Index>(i)] = n / (present * count[static_cast<std::size_t>(y[i])]);
  return w;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

int least_frequent_class(const Dataset& d) {
  const auto counts = d.class_counts();
  int best = 1;
  for (int c = 2; c <= d.class_count; ++c)
    if (counts[static_cast<std::size_t>(c - 1)] < counts[static_cast<std::size_t>(best - 1)]) best = c;
  return best;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset d = load_source(cfg.dataset);
  d.validate();
  if (d.class_count < 2) throw ValidationError("experiment: dataset needs at least 2 classes");
  ExperimentReport report;
  report.samples = d.size();
  report.dataset_name = cfg.dataset.csv ? cfg.dataset.csv->filename().string() : cfg.dataset.generator;
  report.positive_class = cfg.positive_class ? *cfg.positive_class : least_frequent_class(d);
  if (report.positive_class < 1 || report.positive_class > d.class_count)
    throw ValidationError("experiment: positive_class out of range");

  for (const std::uint64_t seed : cfg.seeds) {
    const Split split = cfg.split.kind == SplitKind::Holdout ? holdout_split(d, cfg.split.holdout, seed)
                                                            : period_split(d, cfg);
    const std::set<Index> test_rows(split.test.begin(), split.test.end());
    const Dataset pool_raw = d.subset(split.train);
    const Normalizer norm = fit_minmax(pool_raw);
    const Dataset pool = apply_minmax(norm, pool_raw);
    const Dataset test = apply_minmax(norm, d.subset(split.test));
    const std::vector<int> test_y = hard_labels(test, [&] {
      std::vector<Index> all(static_cast<std::size_t>(test.size()));
      std::iota(all.begin(), all.end(), Index{0});
      return all;
    }());

    for (const auto& base_spec : cfg.strategies) {
      StrategySpec spec = base_spec;
      spec.seed = seed;
      const std::string sname = to_string(spec.strategy);
      SamplingPlan plan;
      std::string plan_error;
      try {
        plan = sample(pool, spec);
      } catch (const std::exception& e) {
        plan_error = std::string("sampling failed: ") + e.what();
      }
      std::vector<Index> train_rows, rest_rows;
      if (plan_error.empty()) {
        report.plans["plan_" + sname + "_" + std::to_string(seed) + ".csv"] = plan_to_csv(plan, pool);
        Index leaked = 0;
        std::set<Index> chosen;
        for (const Index local : plan.selected) {
          if (test_rows.count(split.train[static_cast<std::size_t>(local)])) ++leaked;
          chosen.insert(local);
          if (pool.labels[static_cast<std::size_t>(local)]) train_rows.push_back(local);
        }
        if (leaked > 0)
          report.leakage.push_back(sname + "/" + std::to_string(seed) + ": " + std::to_string(leaked));
        for (Index i = 0; i < pool.size(); ++i)
          if (!chosen.count(i)) rest_rows.push_back(i);
      }
      Matrix train_x(static_cast<Index>(train_rows.size()), pool.dim());
      for (std::size_t r = 0; r < train_rows.size(); ++r) train_x.row(static_cast<Index>(r)) = pool.features.row(train_rows[r]);
      Matrix rest_x(static_cast<Index>(rest_rows.size()), pool.dim());
      for (std::size_t r = 0; r < rest_rows.size(); ++r) rest_x.row(static_cast<Index>(r)) = pool.features.row(rest_rows[r]);
      const std::vector<int> train_y = hard_labels(pool, train_rows);

      for (const auto& cspec : cfg.classifiers) {
        CellResult cell;
        cell.strategy = sname;
        cell.classifier = cspec.kind;
        cell.seed = seed;
        cell.test_size = test.size();
        if (!plan_error.empty()) {
          cell.failed = true;
          cell.error = plan_error;
          report.cells.push_back(std::move(cell));
          continue;
        }
        cell.sampling_seconds = plan.seconds;
        cell.train_size = static_cast<Index>(train_rows.size());
        cell.minority_added = plan.minority_added;
        try {
          auto clf = make_classifier(cspec);
          const auto started = std::chrono::steady_clock::now();
          clf->fit(train_x, train_y, d.class_count, class_weights(train_y, d.class_count, cfg.class_weights), rest_x);
          cell.training_seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
          cell.train = metrics(confusion(clf->predict(train_x), train_y, d.class_count, report.positive_class));
          const Matrix scores = clf->score(test.features);
          cell.test = metrics(confusion(harden(scores), test_y, d.class_count, report.positive_class));
          std::vector<double> pos_score;
          std::vector<bool> is_pos;
          for (Index i = 0; i < scores.rows(); ++i) {
            pos_score.push_back(scores(i, report.positive_class - 1));
            is_pos.push_back(test_y[static_cast<std::size_t>(i)] == report.positive_class);
          }
          if (std::count(is_pos.begin(), is_pos.end(), true) > 0 && std::count(is_pos.begin(), is_pos.end(), false) > 0)
            cell.auc = roc_auc(pos_score, is_pos).auc;
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  if (cfg.out_dir) write_report(report, *cfg.out_dir);
  return report;
}

std::string cells_to_csv(const ExperimentReport& r, bool with_times) {
  std::ostringstream os;
  os << "strategy,classifier,seed,status,train_size,test_size,minority_added";
  for (const char* n : MetricReport::names()) os << ',' << n;
  os << ",AUC";
  for (const char* n : MetricReport::names()) os << ",train_" << n;
  os << ",error";
  if (with_times) os << ",sampling_seconds,training_seconds";
  os << '\n';
  for (const auto& c : r.cells) {
    os << c.strategy << ',' << c.classifier << ',' << c.seed << ',' << (c.failed ? "error" : "ok") << ','
       << c.train_size << ',' << c.test_size << ',' << c.minority_added;
    for (const auto& v : c.test.values()) os << ',' << format_metric(v);
    os << ',' << format_metric(c.auc);
    for (const auto& v : c.train.values()) os << ',' << format_metric(v);
    os << ',' << csv_escape(c.error);
    if (with_times) os << ',' << format_real(c.sampling_seconds) << ',' << format_real(c.training_seconds);
    os << '\n';
  }
  return os.str();
}

namespace {

json aggregate(const std::vector<const CellResult*>& cells, bool with_times) {
  json j;
  j["cells"] = cells.size();
  const auto mean = [&](auto get) -> json {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto* c : cells) {
      const std::optional<double> v = get(*c);
      if (v) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return nullptr;
    return sum / static_cast<double>(n);
  };
  for (std::size_t m = 0; m < 9; ++m)
    j[MetricReport::names()[m]] = mean([&](const CellResult& c) { return c.test.values()[m]; });
  j["AUC"] = mean([](const CellResult& c) { return c.auc; });
  j["train_size"] = mean([](const CellResult& c) { return std::optional<double>(static_cast<double>(c.train_size)); });
  if (with_times) {
    j["sampling_seconds"] = mean([](const CellResult& c) { return std::optional<double>(c.sampling_seconds); });
    j["training_seconds"] = mean([](const CellResult& c) { return std::optional<double>(c.training_seconds); });
  }
  return j;
}

}  // namespace

std::string summary_json(const ExperimentReport& r, bool with_times) {
  json j;
  j["dataset"] = r.dataset_name;
  j["samples"] = r.samples;
  j["positive_class"] = r.positive_class;
  j["time_unit"] = "seconds";
  j["cells"] = r.cells.size();
  json failed = json::array();
  std::map<std::string, std::vector<const CellResult*>> by_strategy, by_classifier;
  for (const auto& c : r.cells) {
    if (c.failed) {
      failed.push_back({{"strategy", c.strategy}, {"classifier", c.classifier}, {"seed", c.seed}, {"error", c.error}});
      continue;
    }
    by_strategy[c.strategy].push_back(&c);
    by_classifier[c.classifier].push_back(&c);
  }
  j["failed"] = failed;
  j["leakage_violations"] = r.leakage;
  for (const auto& [k, v] : by_strategy) j["by_strategy"][k] = aggregate(v, with_times);
  for (const auto& [k, v] : by_classifier) j["by_classifier"][k] = aggregate(v, with_times);
  return j.dump(2) + "\n";
}

void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name);
    if (!out) throw RuntimeError("cannot write " + (dir / name).string());
    out << body;
  };
  write("cells.csv", cells_to_csv(r));
  write("summary.json", summary_json(r));
  for (const auto& [name, body] : r.plans) write(name, body);
}

}  // namespace semisup
