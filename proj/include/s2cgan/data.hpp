#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "s2cgan/raster.hpp"

namespace s2cgan {

/// Co-registered pair of acquisitions over the same area.
struct BitemporalScene {
  Raster x1;
  Raster x2;
  std::optional<BinaryMask> reference_mask;
  BandStats band_stats;
  bool normalized = false;

  int height() const noexcept { return x1.height(); }
  int width() const noexcept { return x1.width(); }
  int bands() const noexcept { return x1.bands(); }

  /// Throws SHAPE_MISMATCH / BAD_MASK / DEGENERATE_BAND on invariant violations.
  void validate() const;
};

struct PatchOrigin {
  int row = 0;
  int col = 0;
  bool operator==(const PatchOrigin&) const = default;
};

/// One tile of a single raster.
struct Patch {
  std::size_t index = 0;
  PatchOrigin origin;
  Raster tile;
};

enum class PartnerKind { kRealT2, kSyntheticUnchanged };

struct PatchPair {
  std::size_t index = 0;
  PatchOrigin origin;
  Raster x1_patch;
  Raster partner;
  PartnerKind partner_kind = PartnerKind::kRealT2;
};

struct SplitSpec {
  std::uint64_t seed = 0;
  double train_fraction = 0.5;
  std::vector<std::size_t> train_ids;  // ascending
  std::vector<std::size_t> test_ids;   // ascending
};

BitemporalScene load_scene(const std::filesystem::path& path_x1, const std::filesystem::path& path_x2,
                           const std::optional<std::filesystem::path>& path_mask = std::nullopt);

/// Per-band min/max of a raster. Throws INVALID_ARGUMENT on non-finite values.
BandStats compute_band_stats(const Raster& r);

/// Affine per-band map [min, max] -> [-1, 1]. Throws DEGENERATE_BAND if max == min.
Raster normalize_raster(const Raster& r, const BandStats& stats);
Raster denormalize_raster(const Raster& r, const BandStats& stats);

/// Normalizes x1 and x2 with stats derived from x1; records them in band_stats.
BitemporalScene normalize(const BitemporalScene& scene);
/// Normalizes with externally supplied stats (e.g. those stored in a checkpoint).
BitemporalScene normalize_with(const BitemporalScene& scene, const BandStats& stats);
BitemporalScene denormalize(const BitemporalScene& scene);

/// Non-overlapping P x P tiles in row-major order; partial edge tiles are dropped.
std::vector<Patch> tile_raster(const Raster& r, int patch_size);
std::vector<PatchPair> tile(const BitemporalScene& scene, int patch_size);

/// Extent covered by complete tiles.
inline int cropped_extent(int extent, int patch_size) { return (extent / patch_size) * patch_size; }

/// Writes tiles back at their origins into a raster of the given size.
Raster stitch(std::span<const Patch> patches, int height, int width);

SplitSpec split(std::size_t patch_count, double train_fraction, std::uint64_t seed);
SplitSpec split(std::span<const PatchPair> patches, double train_fraction, std::uint64_t seed);

/// Crops a raster to the top-left height x width window.
Raster crop(const Raster& r, int height, int width);
BinaryMask crop(const BinaryMask& m, int height, int width);

}  // namespace s2cgan
