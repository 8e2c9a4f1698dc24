#pragma once

#include "semisup/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace semisup {

/// Defect code per pile part: -1 neck, 0 none, +1 bulb.
using DefectVector = std::vector<int>;

struct WaveformObservation {
  std::string pile_id;
  DefectVector part_defects;
  Vector signal;
};

/// Ideal (defect-free) response plus observed responses of defective piles.
/// Single z-analog channel.
struct WaveformSet {
  Vector ideal;
  std::vector<WaveformObservation> observed;
  double time_step = 6e-6;

  Index length() const { return ideal.size(); }
  Index parts() const { return observed.empty() ? 0 : static_cast<Index>(observed.front().part_defects.size()); }
  void validate() const;
};

/// Synthetic hammer-impact echo model.
///
/// ideal(t) = exp(-damping t) sin(2 pi frequency t). A defect at part p adds an
/// echo wavelet delayed by first_delay + p * delay_step steps, signed +1 for a
/// bulb and -1 for a neck. Each (configuration, node) observation draws its own
/// echo severity and delay jitter, which plays the role of the sensor node.
struct EchoConfig {
  Index parts = 4;
  Index length = 2000;
  double time_step = 6e-6;
  double frequency = 2500.0;   // Hz, ideal oscillation
  double damping = 900.0;      // 1/s
  double echo_amplitude = 0.35;
  double echo_frequency = 6000.0;
  Index echo_width = 40;       // steps, wavelet support
  Index first_delay = 50;
  Index delay_step = 80;
  double severity_jitter = 0.3;  // relative spread of echo amplitude
  Index delay_jitter = 3;        // +- steps
  double noise_sigma = 0.0;      // additive white noise on every observation
  Index nodes = 6;               // observations per defect configuration
  std::vector<std::string> names;
  std::vector<DefectVector> configurations;
};

/// 15 configurations named after the pile geometries: the ideal pile F0, a
/// bulb ("a") or neck ("i") in each single part, and six two-part mixtures.
EchoConfig default_echo_config();

WaveformSet gen_pile_waveforms(const EchoConfig& config, std::uint64_t seed);

enum class WaveDescriptor { MSE, MAE, DIFF };
WaveDescriptor parse_descriptor(const std::string& name);
std::string to_string(WaveDescriptor d);

struct FeaturizeOptions {
  WaveDescriptor descriptor = WaveDescriptor::DIFF;
  Index transient_len = 400;
  Index downsample = 10;
  Index n_windows = 40;
};

/// Difference signal (observed - ideal), truncated to the transient, decimated
/// by `downsample`, then either emitted directly (DIFF) or summarised as the
/// per-window mean squared / mean absolute value over `n_windows` equal windows.
/// Returns the raw feature matrix (one row per observation).
Matrix featurize_signals(const WaveformSet& w, const FeaturizeOptions& opt);

/// One Dataset per part; the label of observation i in dataset p is its defect
/// code at part p mapped to classes 1 (neck), 2 (none), 3 (bulb).
std::vector<Dataset> featurize_waveforms(const WaveformSet& w, const FeaturizeOptions& opt);

inline int defect_to_class(int code) { return code + 2; }
inline int class_to_defect(int cls) { return cls - 2; }

/// Writes `<stem>_meta.csv` (pile_id, time_step, part defects) and
/// `<stem>_signals.csv` (first row "ideal", then one row per observation).
void save_waveforms(const WaveformSet& w, const std::filesystem::path& stem);
WaveformSet load_waveforms(const std::filesystem::path& stem);

}  // namespace semisup
