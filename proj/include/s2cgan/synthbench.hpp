#pragma once

// Seeded synthetic bitemporal scenes with exact change ground truth.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "s2cgan/data.hpp"

namespace s2cgan {

enum class BlobShape { kEllipse, kRectangle };

/// Pixel (r, c) belongs to an ellipse iff ((r - cr)/ar)^2 + ((c - cc)/ac)^2 <= 1,
/// to a rectangle iff |r - cr| <= ar and |c - cc| <= ac.
struct ChangeBlob {
  BlobShape shape = BlobShape::kEllipse;
  double center_row = 0.0;
  double center_col = 0.0;
  double radius_row = 1.0;
  double radius_col = 1.0;
  std::vector<double> shift;  // per band, reflectance units

  bool contains(int row, int col) const;
};

/// Multi-octave value noise: cell size halves and amplitude scales by
/// `persistence` per octave.
struct TextureSpec {
  int octaves = 4;
  double persistence = 0.5;
  int base_cell = 64;
};

struct SynthSpec {
  std::string name;
  int height = 256;
  int width = 256;
  int bands = 3;
  TextureSpec texture;
  std::vector<ChangeBlob> blobs;
  std::vector<double> radiometric_shift;  // per band; empty = none
  /// Sensor noise in normalized units: the raw standard deviation of band b
  /// is sigma * (max_b - min_b) / 2 over x1, matching the training noise.
  double noise_sigma = 0.02;
  std::uint64_t seed = 0;
};

/// Throws BLOB_OUT_OF_BOUNDS if any footprint leaves the scene.
BitemporalScene generate(const SynthSpec& spec);

/// Union of the blob footprints on a height x width grid.
BinaryMask blob_footprint(const std::vector<ChangeBlob>& blobs, int height, int width);

struct Scenario {
  SynthSpec spec;
  double min_change_fraction = 0.0;
  double max_change_fraction = 0.0;
};

inline constexpr int kSuiteVersion = 1;

/// Fixed scenarios: "null", "blobs-2pct", "blobs-5pct", "blobs-10pct",
/// "blobs-10pct-shift", "blobs-15pct-shift".
std::vector<Scenario> standard_suite();
std::optional<Scenario> find_scenario(const std::string& name);

}  // namespace s2cgan
