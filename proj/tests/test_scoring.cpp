#include <catch2/catch_amalgamated.hpp>

#include <limits>

#include "s2cgan/error.hpp"
#include "s2cgan/scoring.hpp"
#include "support/helpers.hpp"

using namespace s2cgan;

namespace {

ScoreRaster map_of(int h, int w, std::vector<float> v, ScoreKind kind = ScoreKind::kFused,
                   Polarity p = Polarity::kHighMeansChange) {
  ScoreRaster s(h, w, kind, p);
  s.values = std::move(v);
  return s;
}

// Between-class variance by the textbook class-mean formula.
struct BruteOtsu {
  int cut = 1;
  double variance = -1.0;
};

BruteOtsu brute_force_otsu(const Histogram& hist) {
  double total = 0.0;
  for (auto c : hist) total += static_cast<double>(c);
  BruteOtsu best;
  for (int k = 1; k < kHistogramBins; ++k) {
    double n0 = 0.0, n1 = 0.0, m0 = 0.0, m1 = 0.0;
    for (int i = 0; i < kHistogramBins; ++i) {
      const double c = static_cast<double>(hist[static_cast<std::size_t>(i)]);
      if (i < k) {
        n0 += c;
        m0 += c * i;
      } else {
        n1 += c;
        m1 += c * i;
      }
    }
    double var = 0.0;
    if (n0 > 0 && n1 > 0) {
      m0 /= n0;
      m1 /= n1;
      var = (n0 / total) * (n1 / total) * (m0 - m1) * (m0 - m1);
    }
    // Relative slack keeps the comparison robust to rounding in the two formulas.
    if (var > best.variance * (1.0 + 1e-12) + 1e-300) {
      best.variance = var;
      best.cut = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("reconstruction error map examples", "[scoring]") {
  Raster x2(1, 2, 1), r(1, 2, 1);
  x2.at(0, 0, 0) = 1.0f;
  CHECK(reconstruction_error_map(x2, r).values == std::vector<float>{1.0f, 0.0f});
  CHECK(reconstruction_error_map(x2, x2).values == std::vector<float>{0.0f, 0.0f});
  Raster a(1, 1, 2), b(1, 1, 2);
  a.at(0, 0, 0) = 0.2f;
  a.at(1, 0, 0) = -0.4f;
  const ScoreRaster e = reconstruction_error_map(a, b);
  CHECK(e.values[0] == Catch::Approx(0.3f));
  CHECK(e.kind == ScoreKind::kReconstructionError);
  CHECK(e.polarity == Polarity::kHighMeansChange);
  CHECK_THROWS_AS(reconstruction_error_map(a, x2), Error);
}

TEST_CASE("score maps from a zero-weight discriminator are 0.5 everywhere", "[scoring]") {
  Discriminator<float> d(DiscriminatorSpec{2, 4, 0.2});
  for (auto* p : d.parameters()) std::fill(p->value.begin(), p->value.end(), 0.0f);
  const Raster x(8, 8, 2, 0.3f);
  Raster y(8, 8, 2, -0.2f);
  const auto [real, gen] = score_maps(d, x, y, x);
  CHECK(real.height == 8);
  CHECK(real.width == 8);
  for (float v : real.values) CHECK(v == 0.5f);
  const ScoreRaster dif = difference_map(real, gen);
  for (float v : dif.values) CHECK(v == 0.0f);
  CHECK(dif.polarity == Polarity::kLowMeansChange);
}

TEST_CASE("difference map examples", "[scoring]") {
  const auto real = map_of(1, 2, {0.2f, 0.9f}, ScoreKind::kRealPairScore);
  const auto gen = map_of(1, 2, {0.5f, 0.5f}, ScoreKind::kGeneratedPairScore);
  const ScoreRaster d = difference_map(real, gen);
  CHECK(d.values[0] == Catch::Approx(-0.3f));
  CHECK(d.values[1] == Catch::Approx(0.4f));
  const auto c = difference_map(map_of(1, 1, {0.9f}, ScoreKind::kRealPairScore),
                                map_of(1, 1, {0.4f}, ScoreKind::kGeneratedPairScore));
  CHECK(c.values[0] == Catch::Approx(0.5f));
  CHECK_THROWS_AS(difference_map(gen, real), Error);
  CHECK_THROWS_AS(difference_map(real, map_of(1, 1, {0.5f}, ScoreKind::kGeneratedPairScore)), Error);
}

TEST_CASE("Hadamard fusion", "[scoring]") {
  const auto e = map_of(2, 2, {2, 0, 1, 3}, ScoreKind::kReconstructionError);
  const auto f = map_of(2, 2, {0.5f, 1, 0, 1}, ScoreKind::kDifference, Polarity::kLowMeansChange);
  const ScoreRaster lit = fuse(e, f, FusionMode::kLiteral);
  CHECK(lit.values == std::vector<float>{1, 0, 0, 3});
  CHECK(lit.polarity == Polarity::kLowMeansChange);
  // Commutative elementwise product.
  CHECK(fuse(f, e, FusionMode::kLiteral).values == lit.values);

  const auto zero = map_of(2, 2, {0, 0, 0, 0}, ScoreKind::kReconstructionError);
  for (auto mode : {FusionMode::kLiteral, FusionMode::kPolarityAligned}) {
    for (float v : fuse(zero, f, mode).values) CHECK(v == 0.0f);
  }
  CHECK(fuse(zero, f).degenerate);

  // Changed pixel: high e_r, low s_dif. Unchanged pixel: the opposite.
  const auto e2 = map_of(1, 2, {0.9f, 0.1f}, ScoreKind::kReconstructionError);
  const auto d2 = map_of(1, 2, {-0.4f, 0.3f}, ScoreKind::kDifference, Polarity::kLowMeansChange);
  const ScoreRaster h = fuse(e2, d2);
  CHECK(h.polarity == Polarity::kHighMeansChange);
  CHECK(h.values[0] > h.values[1]);
  CHECK_THROWS_AS(fuse(e2, f), Error);
}

TEST_CASE("min-max normalization", "[scoring]") {
  const ScoreRaster n = min_max_normalize(map_of(1, 3, {2, 4, 3}));
  CHECK(n.values == std::vector<float>{0.0f, 1.0f, 0.5f});
  CHECK_FALSE(n.degenerate);
  CHECK(min_max_normalize(map_of(1, 2, {7, 7})).degenerate);
}

TEST_CASE("bin mapping covers [lo, hi] with hi in the last bin", "[scoring]") {
  const BinRange r{0.0, 1.0};
  CHECK(r.bin(0.0) == 0);
  CHECK(r.bin(1.0) == 255);
  CHECK(r.bin(0.5) == 128);
  CHECK(r.bin(-3.0) == 0);
  CHECK(r.width() == Catch::Approx(1.0 / 256));
}

TEST_CASE("global Otsu equals the exhaustive oracle on random histograms", "[scoring][otsu]") {
  std::mt19937_64 eng(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    Histogram hist{};
    const int shape = trial % 4;
    std::uniform_int_distribution<int> count(0, 1000);
    for (int i = 0; i < kHistogramBins; ++i) {
      if (shape == 0) {
        hist[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(count(eng));
      } else if (shape == 1) {
        // Sparse: most bins empty.
        hist[static_cast<std::size_t>(i)] = (eng() % 8 == 0) ? static_cast<std::uint64_t>(count(eng)) : 0;
      } else {
        const double a = 40.0 + static_cast<double>(eng() % 60);
        const double b = 150.0 + static_cast<double>(eng() % 80);
        const double ga = std::exp(-0.5 * std::pow((i - a) / 12.0, 2));
        const double gb = std::exp(-0.5 * std::pow((i - b) / 20.0, 2));
        hist[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(1000.0 * ga + (shape == 2 ? 300.0 : 3000.0) * gb) +
                                            static_cast<std::uint64_t>(eng() % 5);
      }
    }
    const OtsuCut fast = otsu_cut(hist);
    const BruteOtsu slow = brute_force_otsu(hist);
    CAPTURE(trial);
    REQUIRE(fast.cut == slow.cut);
    REQUIRE(fast.between_variance == Catch::Approx(slow.variance).epsilon(1e-9));
    REQUIRE(fast.separability >= 0.0);
    REQUIRE(fast.separability <= 1.0);
  }
}

TEST_CASE("global Otsu separates two clusters", "[scoring][otsu]") {
  ThresholdPolicy p;
  p.mode = ThresholdMode::kGlobalOtsu;
  const ChangeMap m = threshold(map_of(1, 5, {0, 0, 0, 10, 10}), p);
  CHECK(m.mask.values == std::vector<std::uint8_t>{0, 0, 0, 1, 1});
  // Low polarity: the low cluster is the change.
  const ChangeMap low = threshold(map_of(1, 5, {0, 0, 0, 10, 10}, ScoreKind::kFused, Polarity::kLowMeansChange), p);
  CHECK(low.mask.values == std::vector<std::uint8_t>{1, 1, 1, 0, 0});
}

TEST_CASE("a constant map yields no change under every policy", "[scoring]") {
  for (auto mode : {ThresholdMode::kGlobalOtsu, ThresholdMode::kLocalAdaptive}) {
    ThresholdPolicy p;
    p.mode = mode;
    p.window = 16;
    p.stride = 8;
    const ChangeMap m = threshold(map_of(40, 40, std::vector<float>(1600, 0.7f)), p);
    CHECK(m.mask.count_ones() == 0);
  }
}

TEST_CASE("local adaptive thresholding follows each half's own Otsu split", "[scoring][local]") {
  const int rows = 128, cols = 256;
  std::mt19937_64 eng(5);
  std::normal_distribution<double> jitter(0.0, 0.01);
  std::vector<float> v(static_cast<std::size_t>(rows) * cols);
  // Left half: low-contrast clusters at 0.10 / 0.30; right half: 0.55 / 0.95.
  // Both halves tile a periodic 64 x 64 pattern with a 16 x 16 bright block.
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const bool bright = (r % 64) < 16 && (c % 64) < 16;
      const bool left = c < cols / 2;
      const double base = left ? (bright ? 0.30 : 0.10) : (bright ? 0.95 : 0.55);
      v[static_cast<std::size_t>(r) * cols + c] = static_cast<float>(base + jitter(eng));
    }
  }
  const ScoreRaster h = map_of(rows, cols, v);
  ThresholdPolicy p;
  p.mode = ThresholdMode::kLocalAdaptive;
  p.window = 128;
  p.stride = 128;
  const std::vector<float> tau = threshold_surface(h, p);

  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const BinRange range{*lo, *hi};
  auto half_oracle = [&](int c0) {
    std::vector<float> part;
    for (int r = 0; r < rows; ++r)
      for (int c = c0; c < c0 + cols / 2; ++c) part.push_back(v[static_cast<std::size_t>(r) * cols + c]);
    const BruteOtsu o = brute_force_otsu(make_histogram(part, range));
    return range.lo + o.cut * range.width();
  };
  const double left = half_oracle(0);
  const double right = half_oracle(cols / 2);
  CHECK(std::abs(tau[static_cast<std::size_t>(64) * cols + 10] - left) <= range.width());
  CHECK(std::abs(tau[static_cast<std::size_t>(64) * cols + 240] - right) <= range.width());

  const BinaryMask m = apply_threshold(h, tau);
  CHECK(m.at(5, 5) == 1);      // bright block, left half
  CHECK(m.at(40, 40) == 0);
  CHECK(m.at(5, 133) == 1);    // bright block, right half
  CHECK(m.at(40, 200) == 0);   // past the right window center, tau is that window's own

  // A single global cut cannot see the left half's blocks.
  ThresholdPolicy g = p;
  g.mode = ThresholdMode::kGlobalOtsu;
  CHECK(threshold(h, g).mask.at(5, 5) == 0);
}

TEST_CASE("local windows blend smoothly between centers", "[scoring][local]") {
  std::vector<float> v(64 * 64);
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) v[static_cast<std::size_t>(r) * 64 + c] = static_cast<float>(((r * 7 + c * 13) % 17) / 16.0 * (1 + c / 32));
  ThresholdPolicy p;
  p.window = 16;
  p.stride = 8;
  const std::vector<float> tau = threshold_surface(map_of(64, 64, v), p);
  const auto [lo, hi] = std::minmax_element(tau.begin(), tau.end());
  CHECK(*lo >= *std::min_element(v.begin(), v.end()));
  CHECK(*hi <= *std::max_element(v.begin(), v.end()));
}

TEST_CASE("thresholding with a frozen tau is monotone", "[scoring]") {
  const auto v = testing::random_vector(400, 12, 0.0, 1.0);
  ScoreRaster h(20, 20, ScoreKind::kFused, Polarity::kHighMeansChange);
  std::copy(v.begin(), v.end(), h.values.begin());
  ThresholdPolicy p;
  p.mode = ThresholdMode::kGlobalOtsu;
  const std::vector<float> tau = threshold_surface(h, p);
  const BinaryMask before = apply_threshold(h, tau);
  for (float shift : {0.0f, 0.01f, 0.2f, 3.0f}) {
    ScoreRaster up = h;
    for (float& x : up.values) x += shift;
    const BinaryMask after = apply_threshold(up, tau);
    for (std::size_t i = 0; i < before.values.size(); ++i) {
      if (before.values[i]) REQUIRE(after.values[i] == 1);
    }
  }
}

TEST_CASE("the separability gate declares single-population maps unchanged", "[scoring]") {
  std::mt19937_64 eng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  ScoreRaster h(64, 64, ScoreKind::kFused, Polarity::kHighMeansChange);
  for (float& x : h.values) x = static_cast<float>(n(eng));
  ThresholdPolicy p;
  p.mode = ThresholdMode::kGlobalOtsu;
  p.min_separability = 0.0;
  CHECK(threshold(h, p).mask.count_ones() > 0);
  p.min_separability = 0.9;
  CHECK(threshold(h, p).mask.count_ones() == 0);
}

TEST_CASE("threshold policy validation", "[scoring]") {
  ThresholdPolicy p;
  p.window = 8;
  CHECK_THROWS_AS(p.validate(), Error);
  p.window = 32;
  p.stride = 33;
  CHECK_THROWS_AS(p.validate(), Error);
  p.stride = 16;
  p.validate();
  CHECK(to_string(ThresholdMode::kGlobalOtsu) == "otsu");
  CHECK(to_string(FusionMode::kLiteral) == "literal");
  CHECK(to_string(ScoreKind::kDifference) == "S_DIF");
}

TEST_CASE("detect_scene covers the cropped extent and is deterministic", "[scoring][detect]") {
  Raster x1(40, 36, 2);
  const auto v = testing::random_vector(x1.size(), 3, 0.0, 10.0);
  std::copy(v.begin(), v.end(), x1.mutable_values().begin());
  Raster x2 = x1;
  for (int r = 4; r < 12; ++r)
    for (int c = 4; c < 12; ++c) x2.at(0, r, c) += 8.0f;
  BitemporalScene scene{x1, x2, std::nullopt, {}, false};
  const BandStats stats = compute_band_stats(x1);

  Generator<float> g(GeneratorSpec{2, 4, 4, 0.2, {}});
  Discriminator<float> d(DiscriminatorSpec{2, 4, 0.2});
  init_params(g.parameters(), 1);
  init_params(d.parameters(), 2);
  DetectOptions opt;
  opt.policy.window = 16;
  opt.policy.stride = 8;
  opt.noise_seed = 4;
  const Detection a = detect_scene(scene, g, d, stats, 16, opt);
  const Detection b = detect_scene(scene, g, d, stats, 16, opt);
  CHECK(a.change_map.mask.height == 32);
  CHECK(a.change_map.mask.width == 32);
  for (const ScoreRaster* s : {&a.e_r, &a.s_real, &a.s_gen, &a.s_dif, &a.h}) {
    CHECK(s->height == 32);
    CHECK(s->width == 32);
  }
  CHECK(a.change_map.mask.values == b.change_map.mask.values);
  CHECK(a.h.values == b.h.values);
  for (float s : a.s_real.values) {
    REQUIRE(s > 0.0f);
    REQUIRE(s < 1.0f);
  }
  for (float e : a.e_r.values) REQUIRE(e >= 0.0f);

  DetectOptions other = opt;
  other.noise_seed = 5;
  CHECK(detect_scene(scene, g, d, stats, 16, other).e_r.values != a.e_r.values);
  other.stochastic = false;
  const Detection q1 = detect_scene(scene, g, d, stats, 16, other);
  other.noise_seed = 6;
  CHECK(detect_scene(scene, g, d, stats, 16, other).e_r.values == q1.e_r.values);

  const BandStats wrong(3, BandRange{0.0, 1.0});
  CHECK_THROWS_AS(detect_scene(scene, g, d, wrong, 16, opt), Error);
}
