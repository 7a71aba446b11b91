#pragma once

// Change-detection chain: reconstruction error, discriminator score maps,
// their difference, Hadamard fusion, and thresholding into a binary map.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "s2cgan/data.hpp"
#include "s2cgan/networks.hpp"
#include "s2cgan/raster.hpp"
#include "s2cgan/score_raster.hpp"

namespace s2cgan {

/// Per-pixel band mean of |x2 - reconstruction|.
ScoreRaster reconstruction_error_map(const Raster& x2_patch, const Raster& reconstruction);

/// (D(x1, x2), D(x1, reconstruction)) as single-channel maps in (0, 1).
std::pair<ScoreRaster, ScoreRaster> score_maps(Discriminator<float>& d, const Raster& x1_patch,
                                               const Raster& x2_patch, const Raster& reconstruction);

/// s_real - s_gen; low values indicate change.
ScoreRaster difference_map(const ScoreRaster& s_real, const ScoreRaster& s_gen);

enum class FusionMode {
  kLiteral,          // e_r * s_dif as written; low values indicate change
  kPolarityAligned,  // norm(e_r) * (1 - norm(s_dif)); high values indicate change
};

/// Min-max rescale to [0, 1]. A constant input yields zeros and sets `degenerate`.
ScoreRaster min_max_normalize(const ScoreRaster& s);

/// Elementwise (Hadamard) fusion. In aligned mode a constant input makes the
/// result all-zero with `degenerate` set.
ScoreRaster fuse(const ScoreRaster& e_r, const ScoreRaster& s_dif,
                 FusionMode mode = FusionMode::kPolarityAligned);

// ---------------------------------------------------------------------------
// Thresholding

inline constexpr int kHistogramBins = 256;
using Histogram = std::array<std::uint64_t, kHistogramBins>;

/// Maps values in [lo, hi] to bins 0..255: floor((v - lo) / (hi - lo) * 256),
/// with hi itself in the last bin.
struct BinRange {
  double lo = 0.0;
  double hi = 0.0;

  int bin(double v) const;
  double width() const { return (hi - lo) / kHistogramBins; }
};

Histogram make_histogram(std::span<const float> values, const BinRange& range);

struct OtsuCut {
  int cut = 1;                   // class 1 holds bins >= cut, cut in 1..255
  double between_variance = 0.0; // in squared bin units
  double separability = 0.0;     // between-class / total variance, in [0, 1]
};

/// Exhaustive search over the 255 cuts for the maximum between-class
/// variance; ties resolve to the lowest cut.
OtsuCut otsu_cut(const Histogram& hist);

enum class ThresholdMode { kGlobalOtsu, kLocalAdaptive };

struct ThresholdPolicy {
  ThresholdMode mode = ThresholdMode::kLocalAdaptive;
  int window = 128;
  int stride = 64;
  /// A window whose value span is below this fraction of the map's dynamic
  /// range uses the global threshold.
  double min_contrast = 0.01;
  /// Histograms whose best Otsu split explains less than this fraction of the
  /// variance are treated as one population: the global threshold then
  /// declares no change and windows fall back to the global threshold.
  double min_separability = 0.88;

  void validate() const;
};

std::string_view to_string(ThresholdMode mode);
std::string_view to_string(FusionMode mode);

struct ChangeMap {
  BinaryMask mask;
  std::string checkpoint_id;
  ThresholdPolicy policy;
  std::string config_hash;
};

/// Per-pixel threshold surface for `h` (polarity already aligned to
/// high-means-change). A pixel is changed iff h > tau.
std::vector<float> threshold_surface(const ScoreRaster& h, const ThresholdPolicy& policy);

BinaryMask apply_threshold(const ScoreRaster& h, float tau);
BinaryMask apply_threshold(const ScoreRaster& h, std::span<const float> tau);

/// Thresholds a fused map. Low-means-change maps are negated first.
ChangeMap threshold(const ScoreRaster& h, const ThresholdPolicy& policy);

// ---------------------------------------------------------------------------
// Scene-level detection

struct DetectOptions {
  FusionMode fusion = FusionMode::kPolarityAligned;
  ThresholdPolicy policy;
  /// Keeps the generator's dropout noise active at inference; each patch uses
  /// the realization derived from (noise_seed, patch index).
  bool stochastic = true;
  std::uint64_t noise_seed = 0;
  int batch_size = 8;
};

struct Detection {
  ChangeMap change_map;
  ScoreRaster e_r;
  ScoreRaster s_real;
  ScoreRaster s_gen;
  ScoreRaster s_dif;
  ScoreRaster h;
};

/// Runs the chain over every complete P x P tile and thresholds once at scene
/// level. A scene that is not yet normalized is normalized with `band_stats`.
/// Output rasters cover the cropped extent.
Detection detect_scene(const BitemporalScene& scene, Generator<float>& g, Discriminator<float>& d,
                       const BandStats& band_stats, int patch_size, const DetectOptions& options);

}  // namespace s2cgan
