#include "semisup/waveform.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace semisup {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void add_echo(Vector& signal, const EchoConfig& cfg, Index delay, double amplitude) {
  for (Index k = 0; k < cfg.echo_width; ++k) {
    const Index t = delay + k;
    if (t < 0 || t >= signal.size()) continue;
    const double phase = static_cast<double>(k) / static_cast<double>(cfg.echo_width);
    const double window = 0.5 - 0.5 * std::cos(kTwoPi * phase);
    signal[t] += amplitude * window *
                 std::sin(kTwoPi * cfg.echo_frequency * static_cast<double>(k) * cfg.time_step);
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

void WaveformSet::validate() const {
  for (const auto& o : observed) {
    if (o.signal.size() != ideal.size())
      throw ValidationError("waveforms: observation '" + o.pile_id + "' length differs from ideal");
    if (o.part_defects.empty()) throw ValidationError("waveforms: observation '" + o.pile_id + "' has no parts");
    if (static_cast<Index>(o.part_defects.size()) != parts())
      throw ValidationError("waveforms: inconsistent part count at '" + o.pile_id + "'");
    for (const int code : o.part_defects)
      if (code < -1 || code > 1) throw ValidationError("waveforms: defect code outside {-1,0,+1}");
  }
}

EchoConfig default_echo_config() {
  EchoConfig cfg;
  cfg.names = {"F0"};
  cfg.configurations = {{0, 0, 0, 0}};
  for (int p = 0; p < 4; ++p) {
    DefectVector v(4, 0);
    v[static_cast<std::size_t>(p)] = +1;
    cfg.names.push_back("Fa" + std::to_string(p + 1));
    cfg.configurations.push_back(v);
  }
  for (int p = 0; p < 4; ++p) {
    DefectVector v(4, 0);
    v[static_cast<std::size_t>(p)] = -1;
    cfg.names.push_back("Fi" + std::to_string(p + 1));
    cfg.configurations.push_back(v);
  }
  const int mixes[6][2] = {{1, 3}, {2, 4}, {1, 4}, {3, 2}, {4, 1}, {2, 3}};
  const int signs[6][2] = {{+1, -1}, {+1, -1}, {-1, +1}, {+1, -1}, {+1, -1}, {-1, +1}};
  for (int m = 0; m < 6; ++m) {
    DefectVector v(4, 0);
    std::string name = "F";
    for (int s = 0; s < 2; ++s) {
      v[static_cast<std::size_t>(mixes[m][s] - 1)] = signs[m][s];
      name += (signs[m][s] > 0 ? "a" : "i") + std::to_string(mixes[m][s]);
    }
    cfg.names.push_back(name);
    cfg.configurations.push_back(v);
  }
  return cfg;
}

WaveformSet gen_pile_waveforms(const EchoConfig& cfg, std::uint64_t seed) {
  if (cfg.parts < 1) throw ValidationError("gen_pile_waveforms: parts must be >= 1");
  if (cfg.nodes < 1) throw ValidationError("gen_pile_waveforms: nodes must be >= 1");
  if (cfg.configurations.empty()) throw ValidationError("gen_pile_waveforms: no defect configurations");
  const Index last_echo_end = cfg.first_delay + (cfg.parts - 1) * cfg.delay_step + cfg.delay_jitter + cfg.echo_width;
  if (cfg.length < last_echo_end)
    throw ValidationError("gen_pile_waveforms: signal length " + std::to_string(cfg.length) +
                          " shorter than the echo transient (" + std::to_string(last_echo_end) + " steps)");
  for (const auto& v : cfg.configurations) {
    if (static_cast<Index>(v.size()) != cfg.parts)
      throw ValidationError("gen_pile_waveforms: defect vector length must equal parts");
    for (const int code : v)
      if (code < -1 || code > 1)
        throw ValidationError("gen_pile_waveforms: invalid defect code " + std::to_string(code) + " (expected -1, 0 or +1)");
  }

  WaveformSet w;
  w.time_step = cfg.time_step;
  w.ideal.resize(cfg.length);
  for (Index i = 0; i < cfg.length; ++i) {
    const double t = static_cast<double>(i) * cfg.time_step;
    w.ideal[i] = std::exp(-cfg.damping * t) * std::sin(kTwoPi * cfg.frequency * t);
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<Index> jitter(-cfg.delay_jitter, cfg.delay_jitter);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);

  for (std::size_t c = 0; c < cfg.configurations.size(); ++c) {
    const auto& defects = cfg.configurations[c];
    const std::string base = c < cfg.names.size() ? cfg.names[c] : "cfg" + std::to_string(c);
    for (Index node = 0; node < cfg.nodes; ++node) {
      WaveformObservation o;
      o.pile_id = base + "_n" + std::to_string(node);
      o.part_defects = defects;
      o.signal = w.ideal;
      for (Index p = 0; p < cfg.parts; ++p) {
        // Draws happen for every part so the stream does not depend on the defect pattern.
        const double severity = 1.0 + cfg.severity_jitter * unit(rng);
        const Index shift = cfg.delay_jitter > 0 ? jitter(rng) : 0;
        const int code = defects[static_cast<std::size_t>(p)];
        if (code == 0) continue;
        add_echo(o.signal, cfg, cfg.first_delay + p * cfg.delay_step + shift,
                 static_cast<double>(code) * cfg.echo_amplitude * severity);
      }
      if (cfg.noise_sigma > 0.0)
        for (Index i = 0; i < cfg.length; ++i) o.signal[i] += noise(rng);
      w.observed.push_back(std::move(o));
    }
  }
  return w;
}

WaveDescriptor parse_descriptor(const std::string& name) {
  if (name == "MSE" || name == "mse") return WaveDescriptor::MSE;
  if (name == "MAE" || name == "mae") return WaveDescriptor::MAE;
  if (name == "DIFF" || name == "diff") return WaveDescriptor::DIFF;
  throw ValidationError("unknown descriptor '" + name + "'");
}

std::string to_string(WaveDescriptor d) {
  switch (d) {
    case WaveDescriptor::MSE: return "MSE";
    case WaveDescriptor::MAE: return "MAE";
    case WaveDescriptor::DIFF: return "DIFF";
  }
  return "?";
}

Matrix featurize_signals(const WaveformSet& w, const FeaturizeOptions& opt) {
  w.validate();
  if (opt.downsample < 1) throw ValidationError("featurize: downsample must be >= 1");
  if (opt.transient_len < 1 || opt.transient_len > w.length())
    throw ValidationError("featurize: transient length " + std::to_string(opt.transient_len) +
                          " outside 1.." + std::to_string(w.length()));
  const Index reduced = opt.transient_len / opt.downsample;
  if (opt.n_windows < 1) throw ValidationError("featurize: n_windows must be >= 1");
  if (opt.descriptor == WaveDescriptor::DIFF && opt.n_windows != reduced)
    throw ValidationError("featurize: DIFF needs n_windows = transient_len / downsample = " + std::to_string(reduced));
  if (opt.descriptor != WaveDescriptor::DIFF && reduced % opt.n_windows != 0)
    throw ValidationError("featurize: " + std::to_string(reduced) + " samples do not split into " +
                          std::to_string(opt.n_windows) + " equal windows");

  const auto n = static_cast<Index>(w.observed.size());
  Matrix out(n, opt.n_windows);
  Vector decimated(reduced);
  for (Index i = 0; i < n; ++i) {
    const Vector& s = w.observed[static_cast<std::size_t>(i)].signal;
    for (Index k = 0; k < reduced; ++k) {
      const Index t = k * opt.downsample;
      decimated[k] = s[t] - w.ideal[t];
    }
    if (opt.descriptor == WaveDescriptor::DIFF) {
      out.row(i) = decimated.transpose();
      continue;
    }
    const Index width = reduced / opt.n_windows;
    for (Index k = 0; k < opt.n_windows; ++k) {
      const auto seg = decimated.segment(k * width, width);
      out(i, k) = opt.descriptor == WaveDescriptor::MSE ? seg.squaredNorm() / static_cast<double>(width)
                                                        : seg.cwiseAbs().sum() / static_cast<double>(width);
    }
  }
  return out;
}

std::vector<Dataset> featurize_waveforms(const WaveformSet& w, const FeaturizeOptions& opt) {
  const Matrix features = featurize_signals(w, opt);
  std::vector<Dataset> out;
  for (Index p = 0; p < w.parts(); ++p) {
    LabelVector labels;
    for (const auto& o : w.observed) labels.emplace_back(defect_to_class(o.part_defects[static_cast<std::size_t>(p)]));
    Dataset d = make_dataset(features, std::move(labels), 3);
    d.class_names = {"neck", "none", "bulb"};
    d.sample_ids.clear();
    for (const auto& o : w.observed) d.sample_ids.push_back(o.pile_id);
    const std::string prefix = to_string(opt.descriptor);
    for (Index j = 0; j < features.cols(); ++j) d.feature_names[static_cast<std::size_t>(j)] = prefix + std::to_string(j);
    d.metadata["part"] = std::to_string(p + 1);
    d.metadata["descriptor"] = prefix;
    out.push_back(std::move(d));
  }
  return out;
}

void save_waveforms(const WaveformSet& w, const std::filesystem::path& stem) {
  w.validate();
  const auto meta_path = stem.string() + "_meta.csv";
  const auto sig_path = stem.string() + "_signals.csv";
  std::ofstream meta(meta_path);
  std::ofstream sig(sig_path);
  if (!meta || !sig) throw RuntimeError("cannot write waveform files at '" + stem.string() + "'");
  meta << "pile_id,time_step";
  for (Index p = 0; p < w.parts(); ++p) meta << ",part" << (p + 1);
  meta << '\n';
  sig << "pile_id";
  for (Index t = 0; t < w.length(); ++t) sig << ",t" << t;
  sig << '\n';
  const auto write_signal = [&](const std::string& id, const Vector& s) {
    sig << id;
    for (Index t = 0; t < s.size(); ++t) sig << ',' << format_real(s[t]);
    sig << '\n';
  };
  write_signal("ideal", w.ideal);
  for (const auto& o : w.observed) {
    meta << o.pile_id << ',' << format_real(w.time_step);
    for (const int c : o.part_defects) meta << ',' << c;
    meta << '\n';
    write_signal(o.pile_id, o.signal);
  }
}

WaveformSet load_waveforms(const std::filesystem::path& stem) {
  std::ifstream meta(stem.string() + "_meta.csv");
  std::ifstream sig(stem.string() + "_signals.csv");
  if (!meta || !sig) throw ValidationError("cannot open waveform files at '" + stem.string() + "'");
  WaveformSet w;
  std::string line;
  std::getline(meta, line);
  std::getline(sig, line);
  const auto parse_signal = [](const std::vector<std::string>& cells) {
    Vector s(static_cast<Index>(cells.size()) - 1);
    for (std::size_t i = 1; i < cells.size(); ++i) s[static_cast<Index>(i - 1)] = std::stod(cells[i]);
    return s;
  };
  if (!std::getline(sig, line)) throw ParseError("waveforms: missing ideal row");
  w.ideal = parse_signal(split(line));
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() < 3) throw ParseError("waveforms: short metadata row");
    WaveformObservation o;
    o.pile_id = cells[0];
    w.time_step = std::stod(cells[1]);
    for (std::size_t i = 2; i < cells.size(); ++i) o.part_defects.push_back(std::stoi(cells[i]));
    if (!std::getline(sig, line)) throw ParseError("waveforms: signal file shorter than metadata");
    const auto scells = split(line);
    if (scells.empty() || scells[0] != o.pile_id) throw ParseError("waveforms: id mismatch at '" + o.pile_id + "'");
    o.signal = parse_signal(scells);
    w.observed.push_back(std::move(o));
  }
  w.validate();
  return w;
}

}  // namespace semisup
