#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "s2cgan/data.hpp"

namespace s2cgan {

/// Additive zero-mean Gaussian noise in normalized radiometric units.
struct NoiseSpec {
  double sigma = 0.02;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Identifies one noise realization: the same (spec, patch, epoch) always
/// yields the same field regardless of the order patches are processed in.
struct NoiseStream {
  std::uint64_t patch_index = 0;
  std::uint64_t epoch = 0;
};

/// x1 + w with w ~ N(0, sigma^2) i.i.d. per pixel and band, clamped to [-1, 1].
Raster synthesize_unchanged(const Raster& x1_patch, const NoiseSpec& spec, NoiseStream stream = {});

/// One SYNTHETIC_UNCHANGED pair per training id, built from the t1 tiles only.
std::vector<PatchPair> build_training_set(std::span<const Patch> x1_patches, const SplitSpec& split,
                                          const NoiseSpec& spec, std::uint64_t epoch = 0);

/// Same, starting from scene pairs; only `x1_patch` is consulted, never `partner`.
std::vector<PatchPair> build_training_set(std::span<const PatchPair> patches, const SplitSpec& split,
                                          const NoiseSpec& spec, std::uint64_t epoch = 0);

}  // namespace s2cgan
