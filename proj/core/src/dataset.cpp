#include "semisup/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace semisup {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<Index> Dataset::labeled_indices() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i]) out.push_back(static_cast<Index>(i));
  return out;
}

std::vector<Index> Dataset::unlabeled_indices() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!labels[i]) out.push_back(static_cast<Index>(i));
  return out;
}

std::vector<Index> Dataset::class_counts() const {
  std::vector<Index> counts(static_cast<std::size_t>(std::max(class_count, 0)), 0);
  for (const auto& l : labels)
    if (l && *l >= 1 && *l <= class_count) ++counts[static_cast<std::size_t>(*l - 1)];
  return counts;
}

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1) throw ValidationError("dataset: need n >= 1 and d >= 1");
  if (static_cast<Index>(labels.size()) != features.rows())
    throw ValidationError("dataset: label count does not match row count");
  if (static_cast<Index>(sample_ids.size()) != features.rows())
    throw ValidationError("dataset: sample id count does not match row count");
  if (static_cast<Index>(feature_names.size()) != features.cols())
    throw ValidationError("dataset: feature name count does not match column count");
  if (!features.allFinite()) throw ValidationError("dataset: non-finite feature value");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] && (*labels[i] < 1 || *labels[i] > class_count))
      throw ValidationError("dataset: label of sample " + std::to_string(i) + " outside 1.." +
                            std::to_string(class_count));
  }
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index src = rows[r];
    if (src < 0 || src >= size()) throw ValidationError("subset: row index out of range");
    out.features.row(static_cast<Index>(r)) = features.row(src);
    out.labels.push_back(labels[static_cast<std::size_t>(src)]);
    out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(src)]);
  }
  out.class_count = class_count;
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.metadata = metadata;
  return out;
}

Dataset Dataset::without_labels() const {
  Dataset out = *this;
  std::fill(out.labels.begin(), out.labels.end(), std::nullopt);
  return out;
}

Dataset make_dataset(Matrix features, LabelVector labels, int class_count) {
  Dataset d;
  const Index n = features.rows();
  const Index dim = features.cols();
  d.features = std::move(features);
  d.labels = std::move(labels);
  if (d.labels.empty()) d.labels.resize(static_cast<std::size_t>(n));
  d.class_count = class_count;
  for (Index j = 0; j < dim; ++j) d.feature_names.push_back("x" + std::to_string(j));
  for (Index i = 0; i < n; ++i) d.sample_ids.push_back(std::to_string(i));
  for (int c = 1; c <= class_count; ++c) d.class_names.push_back(std::to_string(c));
  return d;
}

Dataset parse_csv(const std::string& text, const CsvOptions& options, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  int label_col = -1;
  int id_col = -1;
  std::vector<int> feature_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& name = header[j];
    if (name == options.label_column) {
      label_col = static_cast<int>(j);
    } else if (name == options.id_column) {
      id_col = static_cast<int>(j);
    } else if (std::find(options.ignore_columns.begin(), options.ignore_columns.end(), name) ==
               options.ignore_columns.end()) {
      feature_cols.push_back(static_cast<int>(j));
    }
  }
  if (label_col < 0) throw ValidationError(source + ": label column '" + options.label_column + "' not found");
  if (feature_cols.empty()) throw ValidationError(source + ": no feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> label_cells;
  std::vector<std::string> ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(source + ": row " + std::to_string(rows.size() + 1) + " (line " + std::to_string(line_no) +
                       ") has " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    std::vector<double> values;
    values.reserve(feature_cols.size());
    for (const int j : feature_cols) {
      double v = 0.0;
      const std::string cell = trim(cells[static_cast<std::size_t>(j)]);
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw ParseError(source + ": row " + std::to_string(rows.size() + 1) + ", column '" +
                         header[static_cast<std::size_t>(j)] + "': malformed numeric cell '" + cell + "'");
      }
      values.push_back(v);
    }
    rows.push_back(std::move(values));
    label_cells.push_back(trim(cells[static_cast<std::size_t>(label_col)]));
    ids.push_back(id_col >= 0 ? trim(cells[static_cast<std::size_t>(id_col)]) : std::to_string(ids.size()));
  }
  if (rows.empty()) throw ParseError(source + ": empty dataset (no data rows)");

  Dataset d;
  d.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(feature_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < feature_cols.size(); ++j)
      d.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  for (const int j : feature_cols) d.feature_names.push_back(header[static_cast<std::size_t>(j)]);
  d.sample_ids = std::move(ids);

  std::unordered_map<std::string, int> class_of;
  for (const auto& cell : label_cells) {
    if (cell == options.unlabeled_marker) {
      d.labels.emplace_back(std::nullopt);
      continue;
    }
    auto it = class_of.find(cell);
    if (it == class_of.end()) {
      d.class_names.push_back(cell);
      it = class_of.emplace(cell, static_cast<int>(d.class_names.size())).first;
    }
    d.labels.emplace_back(it->second);
  }
  d.class_count = static_cast<int>(d.class_names.size());
  d.metadata["source"] = source;
  d.validate();
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  return parse_csv(read_file(path), options, path.string());
}

std::vector<std::string> read_csv_column(const std::filesystem::path& path, const std::string& column) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);
  std::size_t col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (trim(header[j]) == column) col = j;
  if (col == header.size()) throw ValidationError(path.string() + ": column '" + column + "' not found");
  std::vector<std::string> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (col >= cells.size()) throw ParseError(path.string() + ": short row " + std::to_string(out.size() + 1));
    out.push_back(trim(cells[col]));
  }
  return out;
}

std::string to_csv(const Dataset& d, const CsvOptions& options) {
  std::ostringstream out;
  out << options.id_column;
  for (const auto& name : d.feature_names) out << ',' << name;
  out << ',' << options.label_column << '\n';
  for (Index i = 0; i < d.size(); ++i) {
    out << d.sample_ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < d.dim(); ++j) out << ',' << format_real(d.features(i, j));
    const auto& l = d.labels[static_cast<std::size_t>(i)];
    out << ',';
    if (!l) {
      out << options.unlabeled_marker;
    } else if (static_cast<std::size_t>(*l) <= d.class_names.size()) {
      out << d.class_names[static_cast<std::size_t>(*l - 1)];
    } else {
      out << *l;
    }
    out << '\n';
  }
  return out.str();
}

void save_csv(const Dataset& d, const std::filesystem::path& path, const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out << to_csv(d, options);
}

Normalizer fit_minmax(const Dataset& d) {
  Normalizer nr;
  nr.min = d.features.colwise().minCoeff().transpose();
  nr.max = d.features.colwise().maxCoeff().transpose();
  return nr;
}

Dataset apply_minmax(const Normalizer& nr, const Dataset& d) {
  if (nr.min.size() != d.dim()) throw ValidationError("apply_minmax: normalizer dimension mismatch");
  Dataset out = d;
  for (Index j = 0; j < d.dim(); ++j) {
    const double span = nr.max[j] - nr.min[j];
    if (span > 0.0) {
      out.features.col(j) = (d.features.col(j).array() - nr.min[j]) / span;
    } else {
      out.features.col(j).setZero();
    }
  }
  return out;
}

Dataset gen_four_gaussians(Index n_per_class, double sigma, std::uint64_t seed) {
  if (n_per_class < 1) throw ValidationError("gen_four_gaussians: n_per_class must be >= 1");
  if (!(sigma > 0.0)) throw ValidationError("gen_four_gaussians: sigma must be > 0");
  constexpr double c = kFourGaussianCenter;
  const double centers[4][2] = {{c, c}, {c, -c}, {-c, c}, {-c, -c}};
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  Matrix x(4 * n_per_class, 2);
  LabelVector labels;
  for (int k = 0; k < 4; ++k) {
    for (Index i = 0; i < n_per_class; ++i) {
      const Index row = k * n_per_class + i;
      x(row, 0) = centers[k][0] + noise(rng);
      x(row, 1) = centers[k][1] + noise(rng);
      labels.emplace_back(k + 1);
    }
  }
  Dataset d = make_dataset(std::move(x), std::move(labels), 4);
  d.metadata["generator"] = "four-gauss";
  d.metadata["sigma"] = format_real(sigma);
  d.metadata["mu"] = "0.293";
  d.metadata["seed"] = std::to_string(seed);
  return d;
}

Dataset gen_imbalanced(const ImbalancedConfig& cfg, std::uint64_t seed) {
  if (cfg.n < 2 || cfg.dim < 1) throw ValidationError("gen_imbalanced: need n >= 2, dim >= 1");
  if (!(cfg.minority_fraction > 0.0 && cfg.minority_fraction < 1.0))
    throw ValidationError("gen_imbalanced: minority_fraction must lie in (0,1)");
  const auto n_minor = std::max<Index>(1, static_cast<Index>(std::llround(cfg.minority_fraction * cfg.n)));
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, cfg.sigma);
  Matrix x(cfg.n, cfg.dim);
  LabelVector labels;
  const double shift = cfg.separation / std::sqrt(static_cast<double>(cfg.dim));
  for (Index i = 0; i < cfg.n; ++i) {
    const bool minority = i < n_minor;
    for (Index j = 0; j < cfg.dim; ++j) x(i, j) = noise(rng) + (minority ? shift : 0.0);
    labels.emplace_back(minority ? 2 : 1);
  }
  std::vector<Index> perm(static_cast<std::size_t>(cfg.n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix shuffled(cfg.n, cfg.dim);
  LabelVector shuffled_labels(static_cast<std::size_t>(cfg.n));
  for (Index i = 0; i < cfg.n; ++i) {
    shuffled.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    shuffled_labels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  Dataset d = make_dataset(std::move(shuffled), std::move(shuffled_labels), 2);
  d.class_names = {"majority", "minority"};
  d.metadata["generator"] = "imbalanced";
  d.metadata["seed"] = std::to_string(seed);
  return d;
}

}  // namespace semisup
