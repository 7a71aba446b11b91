#include "s2cgan/pairs.hpp"

#include <algorithm>
#include <random>

#include "s2cgan/error.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise sigma must be >= 0");
}

Raster synthesize_unchanged(const Raster& x1_patch, const NoiseSpec& spec, NoiseStream stream) {
  spec.validate();
  Raster out = x1_patch;
  if (spec.sigma == 0.0) return out;
  Engine engine = make_engine(spec.seed, {stream.patch_index, stream.epoch});
  std::normal_distribution<double> noise(0.0, spec.sigma);
  for (float& v : out.mutable_values()) {
    v = std::clamp(v + static_cast<float>(noise(engine)), -1.0f, 1.0f);
  }
  return out;
}

std::vector<PatchPair> build_training_set(std::span<const Patch> x1_patches, const SplitSpec& split,
                                          const NoiseSpec& spec, std::uint64_t epoch) {
  std::vector<PatchPair> set;
  set.reserve(split.train_ids.size());
  for (std::size_t id : split.train_ids) {
    if (id >= x1_patches.size()) {
      throw Error(ErrorCode::kInvalidArgument, "split references patch " + std::to_string(id));
    }
    const Patch& p = x1_patches[id];
    set.push_back(PatchPair{p.index, p.origin, p.tile,
                            synthesize_unchanged(p.tile, spec, {p.index, epoch}),
                            PartnerKind::kSyntheticUnchanged});
  }
  return set;
}

std::vector<PatchPair> build_training_set(std::span<const PatchPair> patches, const SplitSpec& split,
                                          const NoiseSpec& spec, std::uint64_t epoch) {
  std::vector<PatchPair> set;
  set.reserve(split.train_ids.size());
  for (std::size_t id : split.train_ids) {
    if (id >= patches.size()) {
      throw Error(ErrorCode::kInvalidArgument, "split references patch " + std::to_string(id));
    }
    const PatchPair& p = patches[id];
    set.push_back(PatchPair{p.index, p.origin, p.x1_patch,
                            synthesize_unchanged(p.x1_patch, spec, {p.index, epoch}),
                            PartnerKind::kSyntheticUnchanged});
  }
  return set;
}

}  // namespace s2cgan
