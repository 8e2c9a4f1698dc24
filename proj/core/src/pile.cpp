#include "semisup/pile.hpp"

#include "semisup/classify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace semisup {

using nlohmann::json;

void PileConfig::validate() const {
  if (descriptors.empty()) throw ValidationError("pile: at least one descriptor is required");
  if (classifiers.empty()) throw ValidationError("pile: at least one classifier is required");
  for (const auto& c : classifiers)
    if (c != "harmonic" && c != "knn") throw ValidationError("pile: unknown classifier '" + c + "' (harmonic or knn)");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ValidationError("pile: train_fraction must lie in (0, 1)");
  if (knn_k < 1) throw ValidationError("pile: knn_k must be >= 1");
  if (seeds.empty()) throw ValidationError("pile: at least one seed is required");
  if (echo.nodes < 2) throw ValidationError("pile: need at least 2 nodes per configuration");
  graph.validate();
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ValidationError(where + ": unknown key '" + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("pile config: key '") + key + "' has the wrong type");
  }
}

}  // namespace

PileConfig parse_pile_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pile config: ") + e.what());
  }
  check_keys(j,
             {"echo", "descriptors", "classifiers", "transient_len", "downsample", "n_windows", "graph", "knn_k",
              "train_fraction", "seeds", "out"},
             "pile config");
  PileConfig cfg;
  if (j.contains("echo")) {
    const json& e = j.at("echo");
    check_keys(e,
               {"parts", "length", "time_step", "frequency", "damping", "echo_amplitude", "echo_frequency",
                "echo_width", "first_delay", "delay_step", "severity_jitter", "delay_jitter", "noise_sigma", "nodes"},
               "echo");
    auto& c = cfg.echo;
    read(e, "parts", c.parts);
    read(e, "length", c.length);
    read(e, "time_step", c.time_step);
    read(e, "frequency", c.frequency);
    read(e, "damping", c.damping);
    read(e, "echo_amplitude", c.echo_amplitude);
    read(e, "echo_frequency", c.echo_frequency);
    read(e, "echo_width", c.echo_width);
    read(e, "first_delay", c.first_delay);
    read(e, "delay_step", c.delay_step);
    read(e, "severity_jitter", c.severity_jitter);
    read(e, "delay_jitter", c.delay_jitter);
    read(e, "noise_sigma", c.noise_sigma);
    read(e, "nodes", c.nodes);
  }
  if (j.contains("descriptors")) {
    cfg.descriptors.clear();
    for (const auto& d : j.at("descriptors")) cfg.descriptors.push_back(parse_descriptor(d.get<std::string>()));
  }
  read(j, "classifiers", cfg.classifiers);
  read(j, "transient_len", cfg.features.transient_len);
  read(j, "downsample", cfg.features.downsample);
  read(j, "n_windows", cfg.features.n_windows);
  if (j.contains("graph")) {
    const json& g = j.at("graph");
    check_keys(g, {"kind", "k", "epsilon", "sigma"}, "graph");
    if (g.contains("kind")) cfg.graph.kind = parse_graph_kind(g.at("kind").get<std::string>());
    read(g, "k", cfg.graph.k);
    read(g, "epsilon", cfg.graph.epsilon);
    if (g.contains("sigma")) cfg.graph.sigma = g.at("sigma").get<double>();
  }
  read(j, "knn_k", cfg.knn_k);
  read(j, "train_fraction", cfg.train_fraction);
  read(j, "seeds", cfg.seeds);
  if (j.contains("out")) {
    std::filesystem::path p = j.at("out").get<std::string>();
    cfg.out_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  cfg.validate();
  return cfg;
}

PileConfig load_pile_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pile_config(ss.str(), path.parent_path());
}

double soft_defect(const Eigen::Ref<const Vector>& scores) {
  if (scores.size() != 3) throw ValidationError("soft_defect: expected 3 class scores");
  double p = 0.0;
  for (Index c = 0; c < 3; ++c) p += static_cast<double>(class_to_defect(static_cast<int>(c) + 1)) * scores[c];
  return p;
}

namespace {

// Revealed observations: a seeded share of the nodes of every configuration.
std::vector<bool> reveal_nodes(const WaveformSet& w, double fraction, std::uint64_t seed) {
  std::map<std::string, std::vector<Index>> groups;
  std::vector<std::string> order;
  for (Index i = 0; i < static_cast<Index>(w.observed.size()); ++i) {
    const std::string& id = w.observed[static_cast<std::size_t>(i)].pile_id;
    const auto cut = id.rfind("_n");
    const std::string key = cut == std::string::npos ? id : id.substr(0, cut);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(i);
  }
  Rng rng(seed);
  std::vector<bool> revealed(w.observed.size(), false);
  for (const auto& key : order) {
    auto rows = groups[key];
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto m = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(fraction * static_cast<double>(rows.size()))), 1, rows.size() - 1);
    for (std::size_t r = 0; r < m; ++r) revealed[static_cast<std::size_t>(rows[r])] = true;
  }
  return revealed;
}

}  // namespace

PileReport run_pile(const PileConfig& cfg) {
  cfg.validate();
  PileReport report;
  for (const std::uint64_t seed : cfg.seeds) {
    const WaveformSet w = gen_pile_waveforms(cfg.echo, seed);
    report.observations = static_cast<Index>(w.observed.size());
    report.parts = w.parts();
    const auto revealed = reveal_nodes(w, cfg.train_fraction, seed);
    std::vector<Index> train, hidden;
    for (std::size_t i = 0; i < revealed.size(); ++i) (revealed[i] ? train : hidden).push_back(static_cast<Index>(i));

    for (const WaveDescriptor desc : cfg.descriptors) {
      FeaturizeOptions fo = cfg.features;
      fo.descriptor = desc;
      std::vector<Dataset> per_part;
      std::string feat_error;
      try {
        per_part = featurize_waveforms(w, fo);
      } catch (const std::exception& e) {
        feat_error = e.what();
      }
      std::optional<Graph> graph;
      std::string graph_error;
      if (feat_error.empty()) {
        try {
          graph = build_graph(per_part.front().features, cfg.graph);
        } catch (const std::exception& e) {
          graph_error = e.what();
        }
      }
      for (const auto& cname : cfg.classifiers) {
        for (Index p = 0; p < std::max<Index>(report.parts, 1); ++p) {
          PileCell cell;
          cell.seed = seed;
          cell.descriptor = to_string(desc);
          cell.classifier = cname;
          cell.part = p + 1;
          try {
            if (!feat_error.empty()) throw RuntimeError(feat_error);
            const Dataset& d = per_part[static_cast<std::size_t>(p)];
            std::set<int> classes;
            for (const auto& l : d.labels) classes.insert(*l);
            cell.single_class = classes.size() == 1;
            Matrix scores;
            if (cname == "harmonic") {
              if (!graph) throw RuntimeError(graph_error);
              LabelVector labels(static_cast<std::size_t>(d.size()));
              for (const Index i : train) labels[static_cast<std::size_t>(i)] = d.labels[static_cast<std::size_t>(i)];
              scores = harmonic_solve(*graph, labels, 3).scores;
            } else {
              KnnModel m;
              m.reference.resize(static_cast<Index>(train.size()), d.dim());
              for (std::size_t r = 0; r < train.size(); ++r) {
                m.reference.row(static_cast<Index>(r)) = d.features.row(train[r]);
                m.labels.push_back(*d.labels[static_cast<std::size_t>(train[r])]);
              }
              m.class_count = 3;
              m.k = std::min<Index>(cfg.knn_k, m.reference.rows());
              scores = knn_predict(m, d.features).scores;
            }
            Index correct = 0;
            for (const Index i : hidden) {
              const int predicted = map_defect(soft_defect(scores.row(i).transpose()));
              if (defect_to_class(predicted) == *d.labels[static_cast<std::size_t>(i)]) ++correct;
            }
            cell.evaluated = static_cast<Index>(hidden.size());
            cell.accuracy = hidden.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(hidden.size());
          } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
          }
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  if (cfg.out_dir) write_pile_report(report, *cfg.out_dir);
  return report;
}

std::string pile_cells_csv(const PileReport& r) {
  std::ostringstream os;
  os << "seed,descriptor,classifier,part,accuracy,evaluated,single_class,status,error\n";
  for (const auto& c : r.cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << c.seed << ',' << c.descriptor << ',' << c.classifier << ',' << c.part << ',' << format_real(c.accuracy)
       << ',' << c.evaluated << ',' << (c.single_class ? 1 : 0) << ',' << (c.failed ? "error" : "ok") << ',' << err
       << '\n';
  }
  return os.str();
}

namespace {

// (descriptor_classifier) -> part -> mean accuracy over successful seeds.
std::map<std::string, std::map<Index, double>> mean_table(const PileReport& r, std::vector<std::string>& columns) {
  std::map<std::string, std::map<Index, std::pair<double, int>>> acc;
  for (const auto& c : r.cells) {
    const std::string key = c.descriptor + "_" + c.classifier;
    if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    if (c.failed) continue;
    auto& slot = acc[key][c.part];
    slot.first += c.accuracy;
    slot.second += 1;
  }
  std::map<std::string, std::map<Index, double>> out;
  for (const auto& [key, parts] : acc)
    for (const auto& [part, s] : parts) out[key][part] = s.first / s.second;
  return out;
}

}  // namespace

std::string pile_table_csv(const PileReport& r) {
  std::vector<std::string> columns;
  const auto table = mean_table(r, columns);
  std::ostringstream os;
  os << "part";
  for (const auto& c : columns) os << ',' << c;
  os << '\n';
  for (Index p = 1; p <= r.parts; ++p) {
    os << p;
    for (const auto& c : columns) {
      const auto it = table.find(c);
      if (it == table.end() || !it->second.count(p))
        os << ",NA";
      else
        os << ',' << format_real(it->second.at(p));
    }
    os << '\n';
  }
  return os.str();
}

std::string pile_summary_json(const PileReport& r) {
  std::vector<std::string> columns;
  const auto table = mean_table(r, columns);
  json j;
  j["observations"] = r.observations;
  j["parts"] = r.parts;
  j["cells"] = r.cells.size();
  json acc = json::object();
  for (const auto& [key, parts] : table) {
    json row = json::object();
    double sum = 0.0;
    for (const auto& [part, v] : parts) {
      row[std::to_string(part)] = v;
      sum += v;
    }
    row["mean"] = parts.empty() ? json(nullptr) : json(sum / static_cast<double>(parts.size()));
    acc[key] = row;
  }
  j["accuracy"] = acc;
  json flags = json::array();
  json failed = json::array();
  for (const auto& c : r.cells) {
    if (c.single_class) flags.push_back({{"descriptor", c.descriptor}, {"classifier", c.classifier}, {"part", c.part}, {"seed", c.seed}});
    if (c.failed) failed.push_back({{"descriptor", c.descriptor}, {"classifier", c.classifier}, {"part", c.part}, {"error", c.error}});
  }
  j["single_class"] = flags;
  j["failed"] = failed;
  return j.dump(2) + "\n";
}

void write_pile_report(const PileReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name);
    if (!out) throw RuntimeError("cannot write " + (dir / name).string());
    out << body;
  };
  write("pile_cells.csv", pile_cells_csv(r));
  write("pile_table.csv", pile_table_csv(r));
  write("pile_summary.json", pile_summary_json(r));
}

}  // namespace semisup
