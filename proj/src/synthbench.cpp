#include "s2cgan/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "s2cgan/error.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

bool ChangeBlob::contains(int row, int col) const {
  const double dr = (row - center_row) / radius_row;
  const double dc = (col - center_col) / radius_col;
  if (shape == BlobShape::kEllipse) return dr * dr + dc * dc <= 1.0;
  return std::abs(dr) <= 1.0 && std::abs(dc) <= 1.0;
}

namespace {

constexpr std::uint64_t kLatticeStream = 0x7E47;
constexpr std::uint64_t kSensorStream = 0x5E45;
constexpr std::uint64_t kPlacementStream = 0xB10B;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// One value-noise field in roughly [-1, 1].
std::vector<double> value_noise(int h, int w, const TextureSpec& tex, std::uint64_t seed, std::uint64_t field) {
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  double amplitude = 1.0;
  double norm = 0.0;
  int cell = std::max(1, tex.base_cell);
  for (int o = 0; o < tex.octaves; ++o) {
    const int gh = h / cell + 2;
    const int gw = w / cell + 2;
    Engine eng = make_engine(seed, {kLatticeStream, field, static_cast<std::uint64_t>(o)});
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
    for (double& v : lattice) v = uni(eng);
    for (int r = 0; r < h; ++r) {
      const double fr = static_cast<double>(r) / cell;
      const int r0 = static_cast<int>(fr);
      const double tr = smoothstep(fr - r0);
      for (int c = 0; c < w; ++c) {
        const double fc = static_cast<double>(c) / cell;
        const int c0 = static_cast<int>(fc);
        const double tc = smoothstep(fc - c0);
        const auto at = [&](int i, int j) { return lattice[static_cast<std::size_t>(i) * gw + j]; };
        const double top = at(r0, c0) + tc * (at(r0, c0 + 1) - at(r0, c0));
        const double bot = at(r0 + 1, c0) + tc * (at(r0 + 1, c0 + 1) - at(r0 + 1, c0));
        out[static_cast<std::size_t>(r) * w + c] += amplitude * (top + tr * (bot - top));
      }
    }
    norm += amplitude;
    amplitude *= tex.persistence;
    cell = std::max(1, cell / 2);
  }
  for (double& v : out) v /= norm;
  return out;
}

void check_blob(const ChangeBlob& b, int h, int w, int bands) {
  if (!(b.radius_row > 0.0 && b.radius_col > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "blob radii must be positive");
  }
  if (b.center_row - b.radius_row < 0.0 || b.center_row + b.radius_row > h - 1 ||
      b.center_col - b.radius_col < 0.0 || b.center_col + b.radius_col > w - 1) {
    throw Error(ErrorCode::kBlobOutOfBounds, "blob footprint leaves the scene");
  }
  if (b.shift.size() != static_cast<std::size_t>(bands)) {
    throw Error(ErrorCode::kInvalidArgument, "blob shift must have one entry per band");
  }
}

// Non-overlapping blobs sampled until the union covers `target` of the scene.
std::vector<ChangeBlob> plant_blobs(double target, int h, int w, int bands, std::uint64_t seed) {
  std::vector<ChangeBlob> blobs;
  if (target <= 0.0) return blobs;
  Engine eng = make_engine(seed, {kPlacementStream});
  std::uniform_real_distribution<double> radius(8.0, 22.0);
  std::uniform_real_distribution<double> magnitude(0.25, 0.4);
  std::bernoulli_distribution sign(0.5);
  BinaryMask mask(h, w);
  const auto area = static_cast<std::size_t>(std::ceil(target * h * w));
  std::size_t covered = 0;
  for (int attempt = 0; covered < area && attempt < 10000; ++attempt) {
    ChangeBlob b;
    b.shape = blobs.size() % 2 == 0 ? BlobShape::kEllipse : BlobShape::kRectangle;
    b.radius_row = std::round(radius(eng));
    b.radius_col = std::round(radius(eng));
    std::uniform_real_distribution<double> rows(b.radius_row + 2, h - 3 - b.radius_row);
    std::uniform_real_distribution<double> cols(b.radius_col + 2, w - 3 - b.radius_col);
    b.center_row = std::round(rows(eng));
    b.center_col = std::round(cols(eng));
    const double sgn = sign(eng) ? 1.0 : -1.0;
    for (int k = 0; k < bands; ++k) b.shift.push_back(sgn * magnitude(eng));
    // Keep a gap of 4 pixels between footprints.
    bool clear = true;
    const int r0 = static_cast<int>(b.center_row - b.radius_row) - 4;
    const int r1 = static_cast<int>(b.center_row + b.radius_row) + 4;
    const int c0 = static_cast<int>(b.center_col - b.radius_col) - 4;
    const int c1 = static_cast<int>(b.center_col + b.radius_col) + 4;
    for (int r = std::max(0, r0); r <= std::min(h - 1, r1) && clear; ++r) {
      for (int c = std::max(0, c0); c <= std::min(w - 1, c1); ++c) {
        if (mask.at(r, c)) {
          clear = false;
          break;
        }
      }
    }
    if (!clear) continue;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (b.contains(r, c) && !mask.at(r, c)) {
          mask.at(r, c) = 1;
          ++covered;
        }
      }
    }
    blobs.push_back(std::move(b));
  }
  return blobs;
}

Scenario make_scenario(const std::string& name, double target, double lo, double hi,
                       std::vector<double> shift, std::uint64_t seed) {
  Scenario s;
  s.spec.name = name;
  s.spec.seed = seed;
  s.spec.radiometric_shift = std::move(shift);
  s.spec.blobs = plant_blobs(target, s.spec.height, s.spec.width, s.spec.bands, seed);
  s.min_change_fraction = lo;
  s.max_change_fraction = hi;
  return s;
}

}  // namespace

BinaryMask blob_footprint(const std::vector<ChangeBlob>& blobs, int height, int width) {
  BinaryMask mask(height, width);
  for (const auto& b : blobs) {
    const int r0 = std::max(0, static_cast<int>(std::floor(b.center_row - b.radius_row)));
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(b.center_row + b.radius_row)));
    const int c0 = std::max(0, static_cast<int>(std::floor(b.center_col - b.radius_col)));
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(b.center_col + b.radius_col)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (b.contains(r, c)) mask.at(r, c) = 1;
      }
    }
  }
  return mask;
}

BitemporalScene generate(const SynthSpec& spec) {
  if (spec.height < 1 || spec.width < 1 || spec.bands < 1) {
    throw Error(ErrorCode::kInvalidArgument, "scene dims must be positive");
  }
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0");
  if (!spec.radiometric_shift.empty() &&
      spec.radiometric_shift.size() != static_cast<std::size_t>(spec.bands)) {
    throw Error(ErrorCode::kInvalidArgument, "radiometric_shift must have one entry per band");
  }
  for (const auto& b : spec.blobs) check_blob(b, spec.height, spec.width, spec.bands);

  const int h = spec.height;
  const int w = spec.width;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  BitemporalScene scene;
  scene.x1 = Raster(h, w, spec.bands);
  scene.x2 = Raster(h, w, spec.bands);

  // Bands share a common structure plus a band-specific component.
  const std::vector<double> shared = value_noise(h, w, spec.texture, spec.seed, 0);
  for (int b = 0; b < spec.bands; ++b) {
    const std::vector<double> own = value_noise(h, w, spec.texture, spec.seed, 1 + static_cast<std::uint64_t>(b));
    auto x1 = scene.x1.mutable_band(b);
    const double base = 0.3 + 0.1 * b;
    for (std::size_t p = 0; p < plane; ++p) {
      x1[p] = static_cast<float>(base + 0.35 * (0.7 * shared[p] + 0.3 * own[p]));
    }
  }

  const BandStats stats = compute_band_stats(scene.x1);
  scene.reference_mask = blob_footprint(spec.blobs, h, w);
  for (int b = 0; b < spec.bands; ++b) {
    const auto x1 = scene.x1.band(b);
    auto x2 = scene.x2.mutable_band(b);
    const double offset = spec.radiometric_shift.empty() ? 0.0 : spec.radiometric_shift[static_cast<std::size_t>(b)];
    const double sigma = spec.noise_sigma * (stats[static_cast<std::size_t>(b)].max - stats[static_cast<std::size_t>(b)].min) / 2.0;
    Engine eng = make_engine(spec.seed, {kSensorStream, static_cast<std::uint64_t>(b)});
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t p = 0; p < plane; ++p) {
      double v = x1[p] + offset;
      if (sigma > 0.0) v += sigma * noise(eng);
      x2[p] = static_cast<float>(v);
    }
    for (const auto& blob : spec.blobs) {
      const BinaryMask fp = blob_footprint({blob}, h, w);
      for (std::size_t p = 0; p < plane; ++p) {
        if (fp.values[p]) x2[p] = static_cast<float>(x2[p] + blob.shift[static_cast<std::size_t>(b)]);
      }
    }
  }
  return scene;
}

std::vector<Scenario> standard_suite() {
  const std::vector<double> shift = {0.04, -0.03, 0.05};
  std::vector<Scenario> suite;
  suite.push_back(make_scenario("null", 0.0, 0.0, 0.0, {}, 101));
  suite.push_back(make_scenario("blobs-2pct", 0.02, 0.02, 0.045, {}, 102));
  suite.push_back(make_scenario("blobs-5pct", 0.05, 0.05, 0.08, {}, 103));
  suite.push_back(make_scenario("blobs-10pct", 0.10, 0.10, 0.135, {}, 104));
  suite.push_back(make_scenario("blobs-10pct-shift", 0.10, 0.10, 0.135, shift, 105));
  suite.push_back(make_scenario("blobs-15pct-shift", 0.15, 0.15, 0.19, shift, 106));
  return suite;
}

std::optional<Scenario> find_scenario(const std::string& name) {
  for (auto& s : standard_suite()) {
    if (s.spec.name == name) return s;
  }
  return std::nullopt;
}

}  // namespace s2cgan
