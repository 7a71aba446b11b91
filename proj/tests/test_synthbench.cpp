#include <catch2/catch_amalgamated.hpp>

#include "s2cgan/error.hpp"
#include "s2cgan/synthbench.hpp"

using namespace s2cgan;

TEST_CASE("null spec with zero noise reproduces x1 and an empty mask", "[synthbench]") {
  SynthSpec s;
  s.name = "quiet";
  s.height = 64;
  s.width = 64;
  s.noise_sigma = 0.0;
  s.seed = 3;
  const BitemporalScene scene = generate(s);
  CHECK(std::equal(scene.x1.values().begin(), scene.x1.values().end(), scene.x2.values().begin()));
  REQUIRE(scene.reference_mask);
  CHECK(scene.reference_mask->count_ones() == 0);
  scene.validate();
}

TEST_CASE("ellipse footprint matches the rasterization oracle", "[synthbench]") {
  ChangeBlob e;
  e.shape = BlobShape::kEllipse;
  e.center_row = 128;
  e.center_col = 128;
  e.radius_row = 20;
  e.radius_col = 10;
  std::size_t expected = 0;
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) {
      const double dy = (y - 128) / 20.0;
      const double dx = (x - 128) / 10.0;
      expected += dy * dy + dx * dx <= 1.0;
    }
  }
  CHECK(blob_footprint({e}, 256, 256).count_ones() == expected);

  ChangeBlob r = e;
  r.shape = BlobShape::kRectangle;
  CHECK(blob_footprint({r}, 256, 256).count_ones() == 41u * 21u);
}

TEST_CASE("generated scenes are seeded and carry the planted change", "[synthbench]") {
  SynthSpec s;
  s.name = "one";
  s.height = 64;
  s.width = 64;
  s.seed = 9;
  ChangeBlob b;
  b.center_row = 30;
  b.center_col = 30;
  b.radius_row = 8;
  b.radius_col = 8;
  b.shift = {0.3, 0.3, 0.3};
  s.blobs = {b};
  const BitemporalScene a = generate(s);
  const BitemporalScene c = generate(s);
  CHECK(std::equal(a.x1.values().begin(), a.x1.values().end(), c.x1.values().begin()));
  CHECK(std::equal(a.x2.values().begin(), a.x2.values().end(), c.x2.values().begin()));
  CHECK(a.reference_mask->values == blob_footprint(s.blobs, 64, 64).values);
  CHECK(a.x2.at(1, 30, 30) - a.x1.at(1, 30, 30) > 0.2f);
  s.seed = 10;
  const BitemporalScene d = generate(s);
  CHECK_FALSE(std::equal(a.x1.values().begin(), a.x1.values().end(), d.x1.values().begin()));
}

TEST_CASE("blobs leaving the scene are rejected", "[synthbench]") {
  SynthSpec s;
  s.height = 64;
  s.width = 64;
  ChangeBlob b;
  b.center_row = 60;
  b.center_col = 30;
  b.radius_row = 8;
  b.radius_col = 4;
  b.shift = {0.1, 0.1, 0.1};
  s.blobs = {b};
  try {
    generate(s);
    FAIL("expected BLOB_OUT_OF_BOUNDS");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBlobOutOfBounds);
  }
}

TEST_CASE("standard suite fractions fall in their declared ranges", "[synthbench]") {
  const auto suite = standard_suite();
  REQUIRE(suite.size() >= 2);
  bool has_null = false;
  for (const auto& sc : suite) {
    CAPTURE(sc.spec.name);
    const double f = blob_footprint(sc.spec.blobs, sc.spec.height, sc.spec.width).fraction();
    CHECK(f >= sc.min_change_fraction);
    CHECK(f <= sc.max_change_fraction);
    has_null = has_null || sc.spec.blobs.empty();
  }
  CHECK(has_null);
  const auto again = standard_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CHECK(suite[i].spec.name == again[i].spec.name);
    CHECK(suite[i].spec.blobs.size() == again[i].spec.blobs.size());
  }
  REQUIRE(find_scenario("blobs-10pct"));
  CHECK(find_scenario("blobs-10pct")->spec.height == 256);
  CHECK(find_scenario("blobs-10pct")->spec.bands == 3);
  CHECK_FALSE(find_scenario("nope"));
}

TEST_CASE("sensor noise follows the normalized-units convention", "[synthbench]") {
  SynthSpec s = find_scenario("null")->spec;
  const BitemporalScene scene = generate(s);
  const BandStats stats = compute_band_stats(scene.x1);
  for (int b = 0; b < scene.bands(); ++b) {
    double sum = 0.0, sq = 0.0;
    const auto a = scene.x1.band(b);
    const auto c = scene.x2.band(b);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = static_cast<double>(c[i]) - a[i];
      sum += d;
      sq += d * d;
    }
    const double n = static_cast<double>(a.size());
    const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
    const double expected = s.noise_sigma * (stats[static_cast<std::size_t>(b)].max - stats[static_cast<std::size_t>(b)].min) / 2.0;
    CHECK(sd == Catch::Approx(expected).epsilon(0.02));
  }
}
