#include "s2cgan/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "s2cgan/batch.hpp"
#include "s2cgan/error.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kReconstructionError: return "E_R";
    case ScoreKind::kRealPairScore: return "S_REAL_PAIR";
    case ScoreKind::kGeneratedPairScore: return "S_GEN_PAIR";
    case ScoreKind::kDifference: return "S_DIF";
    case ScoreKind::kFused: return "FUSED_H";
  }
  return "?";
}

std::string_view to_string(ThresholdMode mode) {
  return mode == ThresholdMode::kGlobalOtsu ? "otsu" : "local";
}

std::string_view to_string(FusionMode mode) {
  return mode == FusionMode::kLiteral ? "literal" : "aligned";
}

namespace {

void require_same_shape(const ScoreRaster& a, const ScoreRaster& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "score rasters differ in shape");
}

ScoreRaster map_from_sample(const Tensor<float>& t, int i, ScoreKind kind, Polarity polarity) {
  ScoreRaster s(t.h(), t.w(), kind, polarity);
  const auto src = t.sample(i);
  std::copy(src.begin(), src.end(), s.values.begin());
  return s;
}

// Band-mean absolute difference for one sample of two [N, B, H, W] tensors.
void error_into(const Tensor<float>& x2, const Tensor<float>& r, int i, std::span<float> out) {
  const std::size_t plane = x2.plane_size();
  const auto a = x2.sample(i);
  const auto b = r.sample(i);
  for (std::size_t p = 0; p < plane; ++p) {
    double sum = 0.0;
    for (int c = 0; c < x2.c(); ++c) {
      const std::size_t k = static_cast<std::size_t>(c) * plane + p;
      sum += std::abs(static_cast<double>(a[k]) - static_cast<double>(b[k]));
    }
    out[p] = static_cast<float>(sum / x2.c());
  }
}

std::vector<float> aligned_values(const ScoreRaster& h) {
  std::vector<float> v = h.values;
  if (h.polarity == Polarity::kLowMeansChange) {
    for (float& x : v) x = -x;
  }
  return v;
}

// Start offsets of windows along one axis; the last window ends at the edge.
std::vector<int> window_starts(int extent, int window, int stride) {
  if (extent <= window) return {0};
  std::vector<int> starts;
  for (int s = 0; s + window < extent; s += stride) starts.push_back(s);
  if (starts.back() != extent - window) starts.push_back(extent - window);
  return starts;
}

// Largest value whose bin falls below the cut, so that v > tau selects
// exactly the bins >= cut.
template <typename Values>
float class0_upper(const Values& values, const BinRange& range, int cut) {
  float tau = -std::numeric_limits<float>::infinity();
  for (float v : values) {
    if (range.bin(v) < cut) tau = std::max(tau, v);
  }
  return tau;
}

// Linear interpolation position of `x` between sorted window centers.
struct Blend {
  int lo = 0;
  int hi = 0;
  double t = 0.0;
};

Blend blend_at(const std::vector<double>& centers, double x) {
  const int n = static_cast<int>(centers.size());
  if (x <= centers.front()) return {0, 0, 0.0};
  if (x >= centers.back()) return {n - 1, n - 1, 0.0};
  int i = 0;
  while (centers[static_cast<std::size_t>(i + 1)] < x) ++i;
  const double span = centers[static_cast<std::size_t>(i + 1)] - centers[static_cast<std::size_t>(i)];
  return {i, i + 1, (x - centers[static_cast<std::size_t>(i)]) / span};
}

}  // namespace

ScoreRaster reconstruction_error_map(const Raster& x2_patch, const Raster& reconstruction) {
  if (!x2_patch.same_shape(reconstruction)) {
    throw Error(ErrorCode::kShapeMismatch, "reconstruction differs in shape from x2");
  }
  const int h = x2_patch.height();
  const int w = x2_patch.width();
  ScoreRaster e(h, w, ScoreKind::kReconstructionError, Polarity::kHighMeansChange);
  const auto a = x2_patch.values();
  const auto b = reconstruction.values();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t p = 0; p < plane; ++p) {
    double sum = 0.0;
    for (int c = 0; c < x2_patch.bands(); ++c) {
      const std::size_t k = static_cast<std::size_t>(c) * plane + p;
      sum += std::abs(static_cast<double>(a[k]) - static_cast<double>(b[k]));
    }
    e.values[p] = static_cast<float>(sum / x2_patch.bands());
  }
  return e;
}

std::pair<ScoreRaster, ScoreRaster> score_maps(Discriminator<float>& d, const Raster& x1_patch,
                                               const Raster& x2_patch, const Raster& reconstruction) {
  if (!x1_patch.same_shape(x2_patch) || !x1_patch.same_shape(reconstruction)) {
    throw Error(ErrorCode::kShapeMismatch, "score_maps operands differ in shape");
  }
  const Raster* x1s[] = {&x1_patch};
  const Raster* x2s[] = {&x2_patch};
  const Raster* rs[] = {&reconstruction};
  const Tensor<float> x1 = stack_rasters(x1s);
  const Tensor<float> real = d.forward(x1, stack_rasters(x2s));
  const Tensor<float> gen = d.forward(x1, stack_rasters(rs));
  return {map_from_sample(real, 0, ScoreKind::kRealPairScore, Polarity::kHighMeansChange),
          map_from_sample(gen, 0, ScoreKind::kGeneratedPairScore, Polarity::kHighMeansChange)};
}

ScoreRaster difference_map(const ScoreRaster& s_real, const ScoreRaster& s_gen) {
  require_same_shape(s_real, s_gen);
  if (s_real.kind != ScoreKind::kRealPairScore || s_gen.kind != ScoreKind::kGeneratedPairScore) {
    throw Error(ErrorCode::kInvalidArgument, "difference_map expects S_REAL_PAIR and S_GEN_PAIR");
  }
  ScoreRaster out(s_real.height, s_real.width, ScoreKind::kDifference, Polarity::kLowMeansChange);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = s_real.values[i] - s_gen.values[i];
  return out;
}

ScoreRaster min_max_normalize(const ScoreRaster& s) {
  ScoreRaster out = s;
  if (s.values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  if (!(range > 0.0)) {
    std::fill(out.values.begin(), out.values.end(), 0.0f);
    out.degenerate = true;
    return out;
  }
  for (float& v : out.values) v = static_cast<float>((v - lo) / range);
  return out;
}

ScoreRaster fuse(const ScoreRaster& e_r, const ScoreRaster& s_dif, FusionMode mode) {
  require_same_shape(e_r, s_dif);
  if (mode == FusionMode::kLiteral) {
    ScoreRaster h(e_r.height, e_r.width, ScoreKind::kFused, Polarity::kLowMeansChange);
    for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = e_r.values[i] * s_dif.values[i];
    return h;
  }
  ScoreRaster h(e_r.height, e_r.width, ScoreKind::kFused, Polarity::kHighMeansChange);
  const ScoreRaster ne = min_max_normalize(e_r);
  const ScoreRaster nd = min_max_normalize(s_dif);
  if (ne.degenerate || nd.degenerate) {
    h.degenerate = true;
    return h;
  }
  for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = ne.values[i] * (1.0f - nd.values[i]);
  return h;
}

int BinRange::bin(double v) const {
  if (!(hi > lo)) return 0;
  const double b = std::floor((v - lo) / (hi - lo) * kHistogramBins);
  return static_cast<int>(std::clamp(b, 0.0, static_cast<double>(kHistogramBins - 1)));
}

Histogram make_histogram(std::span<const float> values, const BinRange& range) {
  Histogram hist{};
  for (float v : values) ++hist[static_cast<std::size_t>(range.bin(v))];
  return hist;
}

OtsuCut otsu_cut(const Histogram& hist) {
  using Wide = __int128;
  Wide n = 0;
  Wide s = 0;
  long double q = 0.0L;
  for (int i = 0; i < kHistogramBins; ++i) {
    n += hist[static_cast<std::size_t>(i)];
    s += static_cast<Wide>(i) * hist[static_cast<std::size_t>(i)];
    q += static_cast<long double>(i) * i * hist[static_cast<std::size_t>(i)];
  }
  OtsuCut best;
  if (n == 0) return best;
  const long double nn = static_cast<long double>(n);
  long double best_var = -1.0L;
  Wide n0 = 0;
  Wide s0 = 0;
  for (int k = 1; k < kHistogramBins; ++k) {
    n0 += hist[static_cast<std::size_t>(k - 1)];
    s0 += static_cast<Wide>(k - 1) * hist[static_cast<std::size_t>(k - 1)];
    const Wide n1 = n - n0;
    const Wide s1 = s - s0;
    long double var = 0.0L;
    if (n0 > 0 && n1 > 0) {
      // w0 w1 (mu0 - mu1)^2 = (n1 s0 - n0 s1)^2 / (n^2 n0 n1)
      const long double diff = static_cast<long double>(n1 * s0 - n0 * s1);
      var = diff * diff / (nn * nn * static_cast<long double>(n0) * static_cast<long double>(n1));
    }
    if (var > best_var) {
      best_var = var;
      best.cut = k;
    }
  }
  const long double mean = static_cast<long double>(s) / nn;
  const long double total = q / nn - mean * mean;
  best.between_variance = static_cast<double>(best_var);
  best.separability = total > 0.0L ? static_cast<double>(std::min(1.0L, best_var / total)) : 0.0;
  return best;
}

void ThresholdPolicy::validate() const {
  if (window < 16) throw Error(ErrorCode::kInvalidArgument, "threshold window must be >= 16");
  if (stride < 1 || stride > window) {
    throw Error(ErrorCode::kInvalidArgument, "threshold stride must lie in [1, window]");
  }
  if (!(min_contrast >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "min_contrast must be >= 0");
  if (!(min_separability >= 0.0 && min_separability <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_separability must lie in [0, 1]");
  }
}

std::vector<float> threshold_surface(const ScoreRaster& h, const ThresholdPolicy& policy) {
  policy.validate();
  const std::vector<float> v = aligned_values(h);
  std::vector<float> tau(v.size());
  if (v.empty()) return tau;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const BinRange range{*lo_it, *hi_it};
  const float no_change = *hi_it;
  if (!(range.hi > range.lo)) {
    std::fill(tau.begin(), tau.end(), no_change);
    return tau;
  }

  const OtsuCut global = otsu_cut(make_histogram(v, range));
  const float global_tau =
      global.separability < policy.min_separability ? no_change : class0_upper(v, range, global.cut);
  if (policy.mode == ThresholdMode::kGlobalOtsu) {
    std::fill(tau.begin(), tau.end(), global_tau);
    return tau;
  }

  const int rows = h.height;
  const int cols = h.width;
  const std::vector<int> row_starts = window_starts(rows, policy.window, policy.stride);
  const std::vector<int> col_starts = window_starts(cols, policy.window, policy.stride);
  const int wh = std::min(rows, policy.window);
  const int ww = std::min(cols, policy.window);
  const double contrast_floor = policy.min_contrast * (range.hi - range.lo);

  std::vector<float> grid(row_starts.size() * col_starts.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t i = 0; i < row_starts.size(); ++i) {
    for (std::size_t j = 0; j < col_starts.size(); ++j) {
      std::vector<float> win;
      win.reserve(static_cast<std::size_t>(wh) * ww);
      for (int r = row_starts[i]; r < row_starts[i] + wh; ++r) {
        const float* row = v.data() + static_cast<std::size_t>(r) * cols;
        win.insert(win.end(), row + col_starts[j], row + col_starts[j] + ww);
      }
      const auto [wlo, whi] = std::minmax_element(win.begin(), win.end());
      float t = global_tau;
      if (static_cast<double>(*whi) - *wlo >= contrast_floor) {
        const OtsuCut local = otsu_cut(make_histogram(win, range));
        if (local.separability >= policy.min_separability) t = class0_upper(win, range, local.cut);
      }
      grid[i * col_starts.size() + j] = t;
    }
  }

  std::vector<double> row_centers;
  for (int s : row_starts) row_centers.push_back(s + (wh - 1) / 2.0);
  std::vector<double> col_centers;
  for (int s : col_starts) col_centers.push_back(s + (ww - 1) / 2.0);
  std::vector<Blend> col_blend;
  for (int c = 0; c < cols; ++c) col_blend.push_back(blend_at(col_centers, c));
  const std::size_t gc = col_starts.size();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const Blend rb = blend_at(row_centers, r);
    for (int c = 0; c < cols; ++c) {
      const Blend& cb = col_blend[static_cast<std::size_t>(c)];
      const auto g = [&](int i, int j) {
        return static_cast<double>(grid[static_cast<std::size_t>(i) * gc + static_cast<std::size_t>(j)]);
      };
      const double top = (1.0 - cb.t) * g(rb.lo, cb.lo) + cb.t * g(rb.lo, cb.hi);
      const double bottom = (1.0 - cb.t) * g(rb.hi, cb.lo) + cb.t * g(rb.hi, cb.hi);
      tau[static_cast<std::size_t>(r) * cols + c] = static_cast<float>((1.0 - rb.t) * top + rb.t * bottom);
    }
  }
  return tau;
}

BinaryMask apply_threshold(const ScoreRaster& h, float tau) {
  const std::vector<float> v = aligned_values(h);
  BinaryMask m(h.height, h.width);
  for (std::size_t i = 0; i < v.size(); ++i) m.values[i] = v[i] > tau ? 1 : 0;
  return m;
}

BinaryMask apply_threshold(const ScoreRaster& h, std::span<const float> tau) {
  if (tau.size() != h.values.size()) {
    throw Error(ErrorCode::kShapeMismatch, "threshold surface differs in size from the score map");
  }
  const std::vector<float> v = aligned_values(h);
  BinaryMask m(h.height, h.width);
  for (std::size_t i = 0; i < v.size(); ++i) m.values[i] = v[i] > tau[i] ? 1 : 0;
  return m;
}

ChangeMap threshold(const ScoreRaster& h, const ThresholdPolicy& policy) {
  ChangeMap out;
  out.policy = policy;
  out.mask = apply_threshold(h, threshold_surface(h, policy));
  return out;
}

Detection detect_scene(const BitemporalScene& scene, Generator<float>& g, Discriminator<float>& d,
                       const BandStats& band_stats, int patch_size, const DetectOptions& options) {
  options.policy.validate();
  if (options.batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!scene.x1.same_shape(scene.x2)) throw Error(ErrorCode::kShapeMismatch, "x1 and x2 differ in shape");
  if (g.spec().bands != scene.bands() || d.spec().bands != scene.bands() ||
      band_stats.size() != static_cast<std::size_t>(scene.bands())) {
    throw Error(ErrorCode::kCheckpointMismatch,
                "networks expect " + std::to_string(g.spec().bands) + " bands, scene has " +
                    std::to_string(scene.bands()));
  }
  const BitemporalScene norm = scene.normalized ? scene : normalize_with(scene, band_stats);
  const std::vector<PatchPair> pairs = tile(norm, patch_size);
  const int rows = cropped_extent(scene.height(), patch_size);
  const int cols = cropped_extent(scene.width(), patch_size);

  Detection out;
  out.e_r = ScoreRaster(rows, cols, ScoreKind::kReconstructionError, Polarity::kHighMeansChange);
  out.s_real = ScoreRaster(rows, cols, ScoreKind::kRealPairScore, Polarity::kHighMeansChange);
  out.s_gen = ScoreRaster(rows, cols, ScoreKind::kGeneratedPairScore, Polarity::kHighMeansChange);

  const auto put = [&](ScoreRaster& dst, std::span<const float> src, PatchOrigin o) {
    for (int r = 0; r < patch_size; ++r) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r) * patch_size, patch_size,
                  dst.values.begin() + static_cast<std::ptrdiff_t>(o.row + r) * cols + o.col);
    }
  };

  g.set_noise_active(options.stochastic);
  const std::size_t batch = static_cast<std::size_t>(options.batch_size);
  std::vector<float> err(static_cast<std::size_t>(patch_size) * patch_size);
  for (std::size_t start = 0; start < pairs.size(); start += batch) {
    const std::size_t end = std::min(pairs.size(), start + batch);
    std::vector<const Raster*> x1s;
    std::vector<const Raster*> x2s;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = start; i < end; ++i) {
      x1s.push_back(&pairs[i].x1_patch);
      x2s.push_back(&pairs[i].partner);
      seeds.push_back(derive_seed(options.noise_seed, {pairs[i].index}));
    }
    const Tensor<float> x1 = stack_rasters(x1s);
    const Tensor<float> x2 = stack_rasters(x2s);
    const Tensor<float> recon = g.forward(x1, seeds);
    const Tensor<float> real = d.forward(x1, x2);
    const Tensor<float> gen = d.forward(x1, recon);
    for (std::size_t i = start; i < end; ++i) {
      const int k = static_cast<int>(i - start);
      error_into(x2, recon, k, err);
      put(out.e_r, err, pairs[i].origin);
      put(out.s_real, real.sample(k), pairs[i].origin);
      put(out.s_gen, gen.sample(k), pairs[i].origin);
    }
  }
  g.set_noise_active(true);

  out.s_dif = difference_map(out.s_real, out.s_gen);
  out.h = fuse(out.e_r, out.s_dif, options.fusion);
  out.change_map = threshold(out.h, options.policy);
  return out;
}

}  // namespace s2cgan
