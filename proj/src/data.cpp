#include "s2cgan/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "s2cgan/error.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

namespace {

std::string dims(const Raster& r) {
  return std::to_string(r.height()) + "x" + std::to_string(r.width()) + "x" + std::to_string(r.bands());
}

}  // namespace

void BitemporalScene::validate() const {
  if (!x1.same_shape(x2)) {
    throw Error(ErrorCode::kShapeMismatch, "x1 " + dims(x1) + " vs x2 " + dims(x2));
  }
  if (reference_mask) {
    if (reference_mask->height != x1.height() || reference_mask->width != x1.width()) {
      throw Error(ErrorCode::kBadMask, "mask size does not match scene");
    }
    for (auto v : reference_mask->values) {
      if (v > 1) throw Error(ErrorCode::kBadMask, "mask contains values outside {0,1}");
    }
  }
  if (!band_stats.empty()) {
    if (band_stats.size() != static_cast<std::size_t>(x1.bands())) {
      throw Error(ErrorCode::kShapeMismatch, "band_stats do not cover every band");
    }
    for (const auto& r : band_stats) {
      if (!(r.max > r.min)) throw Error(ErrorCode::kDegenerateBand, "band stats with max <= min");
    }
  }
}

BitemporalScene load_scene(const std::filesystem::path& path_x1, const std::filesystem::path& path_x2,
                           const std::optional<std::filesystem::path>& path_mask) {
  BitemporalScene scene;
  scene.x1 = read_raster(path_x1);
  scene.x2 = read_raster(path_x2);
  if (path_mask) scene.reference_mask = read_mask(*path_mask);
  scene.validate();
  return scene;
}

BandStats compute_band_stats(const Raster& r) {
  BandStats stats(static_cast<std::size_t>(r.bands()));
  for (int b = 0; b < r.bands(); ++b) {
    const auto band = r.band(b);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (float v : band) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite pixel value");
      lo = std::min<double>(lo, v);
      hi = std::max<double>(hi, v);
    }
    stats[static_cast<std::size_t>(b)] = {lo, hi};
  }
  return stats;
}

Raster normalize_raster(const Raster& r, const BandStats& stats) {
  if (stats.size() != static_cast<std::size_t>(r.bands())) {
    throw Error(ErrorCode::kShapeMismatch, "band stats cover " + std::to_string(stats.size()) +
                                               " bands, raster has " + std::to_string(r.bands()));
  }
  Raster out(r.height(), r.width(), r.bands());
  for (int b = 0; b < r.bands(); ++b) {
    const auto [lo, hi] = stats[static_cast<std::size_t>(b)];
    if (!(hi > lo)) {
      throw Error(ErrorCode::kDegenerateBand, "band " + std::to_string(b) + " is constant");
    }
    const double scale = 2.0 / (hi - lo);
    const auto src = r.band(b);
    auto dst = out.mutable_band(b);
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = static_cast<float>((static_cast<double>(src[i]) - lo) * scale - 1.0);
    }
  }
  out.attach_probe(r.probe());
  return out;
}

Raster denormalize_raster(const Raster& r, const BandStats& stats) {
  if (stats.size() != static_cast<std::size_t>(r.bands())) {
    throw Error(ErrorCode::kShapeMismatch, "band stats do not match raster");
  }
  Raster out(r.height(), r.width(), r.bands());
  for (int b = 0; b < r.bands(); ++b) {
    const auto [lo, hi] = stats[static_cast<std::size_t>(b)];
    const double half = 0.5 * (hi - lo);
    const auto src = r.band(b);
    auto dst = out.mutable_band(b);
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = static_cast<float>((static_cast<double>(src[i]) + 1.0) * half + lo);
    }
  }
  out.attach_probe(r.probe());
  return out;
}

BitemporalScene normalize_with(const BitemporalScene& scene, const BandStats& stats) {
  BitemporalScene out;
  out.x1 = normalize_raster(scene.x1, stats);
  out.x2 = normalize_raster(scene.x2, stats);
  out.reference_mask = scene.reference_mask;
  out.band_stats = stats;
  out.normalized = true;
  return out;
}

BitemporalScene normalize(const BitemporalScene& scene) {
  scene.validate();
  return normalize_with(scene, compute_band_stats(scene.x1));
}

BitemporalScene denormalize(const BitemporalScene& scene) {
  BitemporalScene out;
  out.x1 = denormalize_raster(scene.x1, scene.band_stats);
  out.x2 = denormalize_raster(scene.x2, scene.band_stats);
  out.reference_mask = scene.reference_mask;
  out.band_stats = scene.band_stats;
  out.normalized = false;
  return out;
}

std::vector<Patch> tile_raster(const Raster& r, int patch_size) {
  if (patch_size < 8) throw Error(ErrorCode::kInvalidArgument, "patch_size must be >= 8");
  if (r.height() < patch_size || r.width() < patch_size) {
    throw Error(ErrorCode::kSceneTooSmall, "raster " + dims(r) + " smaller than patch size " +
                                               std::to_string(patch_size));
  }
  const int rows = r.height() / patch_size;
  const int cols = r.width() / patch_size;
  std::vector<Patch> patches;
  patches.reserve(static_cast<std::size_t>(rows) * cols);
  for (int pr = 0; pr < rows; ++pr) {
    for (int pc = 0; pc < cols; ++pc) {
      Patch p;
      p.index = patches.size();
      p.origin = {pr * patch_size, pc * patch_size};
      p.tile = Raster(patch_size, patch_size, r.bands());
      for (int b = 0; b < r.bands(); ++b) {
        const auto src = r.band(b);
        auto dst = p.tile.mutable_band(b);
        for (int y = 0; y < patch_size; ++y) {
          const auto* row = src.data() + static_cast<std::size_t>(p.origin.row + y) * r.width() + p.origin.col;
          std::copy(row, row + patch_size, dst.data() + static_cast<std::size_t>(y) * patch_size);
        }
      }
      p.tile.attach_probe(r.probe());
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

std::vector<PatchPair> tile(const BitemporalScene& scene, int patch_size) {
  scene.validate();
  auto t1 = tile_raster(scene.x1, patch_size);
  auto t2 = tile_raster(scene.x2, patch_size);
  std::vector<PatchPair> pairs;
  pairs.reserve(t1.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    pairs.push_back(PatchPair{t1[i].index, t1[i].origin, std::move(t1[i].tile), std::move(t2[i].tile),
                              PartnerKind::kRealT2});
  }
  return pairs;
}

Raster stitch(std::span<const Patch> patches, int height, int width) {
  if (patches.empty()) return Raster(height, width, 0);
  const int bands = patches.front().tile.bands();
  Raster out(height, width, bands);
  for (const auto& p : patches) {
    const int ph = p.tile.height();
    const int pw = p.tile.width();
    if (p.tile.bands() != bands || p.origin.row + ph > height || p.origin.col + pw > width) {
      throw Error(ErrorCode::kShapeMismatch, "patch does not fit the stitch target");
    }
    for (int b = 0; b < bands; ++b) {
      const auto src = p.tile.band(b);
      auto dst = out.mutable_band(b);
      for (int y = 0; y < ph; ++y) {
        std::copy(src.data() + static_cast<std::size_t>(y) * pw, src.data() + static_cast<std::size_t>(y + 1) * pw,
                  dst.data() + static_cast<std::size_t>(p.origin.row + y) * width + p.origin.col);
      }
    }
  }
  return out;
}

SplitSpec split(std::size_t patch_count, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(patch_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine engine = make_engine(seed, {0x5B117ULL});
  std::shuffle(order.begin(), order.end(), engine);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(patch_count)));
  SplitSpec s;
  s.seed = seed;
  s.train_fraction = train_fraction;
  s.train_ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train_ids.begin(), s.train_ids.end());
  std::sort(s.test_ids.begin(), s.test_ids.end());
  return s;
}

SplitSpec split(std::span<const PatchPair> patches, double train_fraction, std::uint64_t seed) {
  return split(patches.size(), train_fraction, seed);
}

Raster crop(const Raster& r, int height, int width) {
  if (height > r.height() || width > r.width()) {
    throw Error(ErrorCode::kShapeMismatch, "crop larger than raster");
  }
  Raster out(height, width, r.bands());
  for (int b = 0; b < r.bands(); ++b) {
    const auto src = r.band(b);
    auto dst = out.mutable_band(b);
    for (int y = 0; y < height; ++y) {
      std::copy_n(src.data() + static_cast<std::size_t>(y) * r.width(), width,
                  dst.data() + static_cast<std::size_t>(y) * width);
    }
  }
  out.attach_probe(r.probe());
  return out;
}

BinaryMask crop(const BinaryMask& m, int height, int width) {
  if (height > m.height || width > m.width) {
    throw Error(ErrorCode::kShapeMismatch, "crop larger than mask");
  }
  BinaryMask out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out.at(y, x) = m.at(y, x);
  }
  return out;
}

}  // namespace s2cgan
