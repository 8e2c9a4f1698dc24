#pragma once

#include "semisup/propagation.hpp"
#include "semisup/waveform.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semisup {

struct PileConfig {
  EchoConfig echo = default_echo_config();
  std::vector<WaveDescriptor> descriptors{WaveDescriptor::MSE, WaveDescriptor::MAE, WaveDescriptor::DIFF};
  std::vector<std::string> classifiers{"harmonic", "knn"};
  FeaturizeOptions features;  // descriptor field is overridden per run
  GraphSpec graph;
  Index knn_k = 3;
  /// Share of the nodes of every configuration whose labels are revealed.
  double train_fraction = 0.5;
  std::vector<std::uint64_t> seeds{0};
  std::optional<std::filesystem::path> out_dir;

  void validate() const;
};

/// JSON keys: echo {parts, length, time_step, frequency, damping, echo_amplitude,
/// echo_frequency, echo_width, first_delay, delay_step, severity_jitter,
/// delay_jitter, noise_sigma, nodes}, descriptors, classifiers, transient_len,
/// downsample, n_windows, graph {kind, k, epsilon, sigma}, knn_k,
/// train_fraction, seeds, out.
PileConfig parse_pile_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
PileConfig load_pile_config(const std::filesystem::path& path);

struct PileCell {
  std::uint64_t seed = 0;
  std::string descriptor;
  std::string classifier;
  Index part = 0;          // 1-based
  double accuracy = 0.0;
  Index evaluated = 0;
  bool single_class = false;
  bool failed = false;
  std::string error;
};

struct PileReport {
  std::vector<PileCell> cells;
  Index observations = 0;
  Index parts = 0;
};

/// Soft defect value sum_c code(c) * score_c with codes -1, 0, +1 for classes 1, 2, 3.
double soft_defect(const Eigen::Ref<const Vector>& scores);

/// Generate echoes, featurise per descriptor, classify every part with the
/// harmonic field over a graph of all observations or with kNN from the
/// revealed nodes, and score map_defect(soft value) on the hidden nodes.
PileReport run_pile(const PileConfig& cfg);

std::string pile_cells_csv(const PileReport& r);
/// Rows = parts, columns = descriptor_classifier mean accuracy over seeds.
std::string pile_table_csv(const PileReport& r);
std::string pile_summary_json(const PileReport& r);
void write_pile_report(const PileReport& r, const std::filesystem::path& dir);

}  // namespace semisup
