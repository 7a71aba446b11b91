#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "s2cgan/batch.hpp"
#include "s2cgan/checkpoint.hpp"
#include "s2cgan/error.hpp"
#include "s2cgan/losses.hpp"
#include "s2cgan/training.hpp"
#include "support/helpers.hpp"

using namespace s2cgan;

namespace {

struct Toy {
  std::vector<Patch> tiles;
  SplitSpec split;
  NoiseSpec noise{0.02, 3};
  std::vector<PatchPair> set;
  std::vector<PatchPair> held;

  Toy() {
    Raster x(32, 32, 2);
    for (int b = 0; b < 2; ++b)
      for (int y = 0; y < 32; ++y)
        for (int c = 0; c < 32; ++c) x.at(b, y, c) = static_cast<float>(0.8 * std::sin(0.3 * y + 0.2 * c + b));
    tiles = tile_raster(x, 8);
    split = s2cgan::split(tiles.size(), 0.5, 1);
    set = build_training_set(tiles, split, noise);
    SplitSpec h = split;
    h.train_ids = split.test_ids;
    held = build_training_set(tiles, h, NoiseSpec{0.02, 99});
  }
};

struct Nets {
  Generator<float> g{GeneratorSpec{2, 4, 4, 0.2, {}}};
  Discriminator<float> d{DiscriminatorSpec{2, 4, 0.2}};
  explicit Nets(std::uint64_t seed) {
    init_params(g.parameters(), seed);
    init_params(d.parameters(), seed + 1);
  }
};

TrainConfig toy_config() {
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 4;
  c.seed = 5;
  return c;
}

std::vector<float> flatten(const std::vector<Parameter<float>*>& ps) {
  std::vector<float> out;
  for (const auto* p : ps) out.insert(out.end(), p->value.begin(), p->value.end());
  return out;
}

}  // namespace

TEST_CASE("training is deterministic for a fixed seed", "[training]") {
  Toy toy;
  Nets a(11), b(11);
  TrainOptions opt;
  opt.noise = toy.noise;
  opt.held_out = toy.held;
  const TrainResult ra = train(toy.set, a.g, a.d, toy_config(), opt);
  const TrainResult rb = train(toy.set, b.g, b.d, toy_config(), opt);
  CHECK(flatten(a.g.parameters()) == flatten(b.g.parameters()));
  CHECK(flatten(a.d.parameters()) == flatten(b.d.parameters()));
  REQUIRE(ra.epochs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ra.epochs[i].g_l1 == rb.epochs[i].g_l1);
    CHECK(ra.epochs[i].checkpoint_id == rb.epochs[i].checkpoint_id);
    CHECK(ra.epochs[i].held_out_l1.has_value());
  }
  CHECK(ra.log.steps.size() == 3 * 2);
}

TEST_CASE("zero learning rates leave every parameter unchanged", "[training]") {
  Toy toy;
  Nets n(12);
  const auto g0 = flatten(n.g.parameters());
  const auto d0 = flatten(n.d.parameters());
  TrainConfig c = toy_config();
  c.learning_rate_g = 0.0;
  c.learning_rate_d = 0.0;
  train(toy.set, n.g, n.d, c, TrainOptions{toy.noise});
  CHECK(flatten(n.g.parameters()) == g0);
  CHECK(flatten(n.d.parameters()) == d0);
}

TEST_CASE("a small discriminator step lowers the discriminator loss", "[training]") {
  Toy toy;
  Nets n(13);
  std::vector<const Raster*> x1s, x2s;
  for (const auto& p : toy.set) {
    x1s.push_back(&p.x1_patch);
    x2s.push_back(&p.partner);
  }
  const Tensor<float> x1 = stack_rasters(x1s);
  const Tensor<float> x2 = stack_rasters(x2s);
  const std::vector<std::uint64_t> seeds(x1.n(), 1);
  const Tensor<float> fake = n.g.forward(x1, seeds);
  auto d_loss = [&] {
    const Tensor<float> r = n.d.forward(x1, x2);
    const Tensor<float> f = n.d.forward(x1, fake);
    return loss_cgan_d<float>(r.values(), f.values());
  };
  // Give D a nontrivial starting point so the gradient is not vanishing.
  for (auto* p : n.d.parameters()) {
    const auto v = testing::random_vector(p->size(), 77, -0.5, 0.5);
    std::copy(v.begin(), v.end(), p->value.begin());
  }
  const double before = d_loss();
  n.d.zero_grad();
  const Tensor<float> r = n.d.forward(x1, x2);
  Tensor<float> gr(r.n(), 1, r.h(), r.w());
  loss_cgan_d_real_grad<float>(r.values(), gr.values());
  n.d.backward(gr);
  const Tensor<float> f = n.d.forward(x1, fake);
  Tensor<float> gf(f.n(), 1, f.h(), f.w());
  loss_cgan_d_fake_grad<float>(f.values(), gf.values());
  n.d.backward(gf);
  sgd_step(n.d.parameters(), 1e-4, 0.0);
  CHECK(d_loss() < before);
}

TEST_CASE("sgd_step applies momentum", "[training]") {
  Parameter<float> p("w", {2});
  p.value = {1.0f, -1.0f};
  p.grad = {0.5f, 0.25f};
  sgd_step({&p}, 0.1, 0.5);
  CHECK(p.value[0] == Catch::Approx(0.95f));
  sgd_step({&p}, 0.1, 0.5);
  // v = 0.5 * 0.5 + 0.5 = 0.75
  CHECK(p.value[0] == Catch::Approx(0.95f - 0.075f));
  CHECK(p.value[1] == Catch::Approx(-1.0f - 0.025f - 0.0375f));
}

TEST_CASE("checkpoints round-trip bit-exactly", "[training][checkpoint]") {
  testing::TempDir dir("ckpt");
  Nets n(14);
  CheckpointInfo info;
  info.generator = n.g.spec();
  info.discriminator = n.d.spec();
  info.band_stats = {{0.0, 1.0}, {-2.0, 5.5}};
  info.patch_size = 8;
  info.epoch = 4;
  info.config_hash = "abc";
  const CheckpointInfo saved = save_checkpoint(dir.path() / "c", n.g, n.d, info);
  CHECK(saved.checkpoint_id == checkpoint_id_for(n.g, n.d, 4));
  const LoadedCheckpoint ck = load_checkpoint(dir.path() / "c");
  CHECK(ck.info.checkpoint_id == saved.checkpoint_id);
  CHECK(ck.info.patch_size == 8);
  CHECK(ck.info.band_stats[1].max == 5.5);
  CHECK(ck.info.config_hash == "abc");
  const auto& lg = *ck.generator;
  CHECK(lg.spec().base_channels == 4);
  CHECK(flatten(ck.generator->parameters()) == flatten(n.g.parameters()));
  CHECK(flatten(ck.discriminator->parameters()) == flatten(n.d.parameters()));
  CHECK(resolve_checkpoint(dir.path() / "c") == dir.path() / "c");
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing"), Error);
}

TEST_CASE("per-epoch checkpoints, pointers and pruning", "[training][checkpoint]") {
  testing::TempDir dir("ptr");
  Toy toy;
  Nets n(15);
  TrainOptions opt;
  opt.noise = toy.noise;
  opt.held_out = toy.held;
  opt.checkpoint_dir = dir.path();
  opt.checkpoint_info.generator = n.g.spec();
  opt.checkpoint_info.discriminator = n.d.spec();
  opt.checkpoint_info.band_stats = {{0.0, 1.0}, {0.0, 1.0}};
  opt.checkpoint_info.patch_size = 8;
  std::vector<int> seen;
  opt.on_epoch = [&](const EpochSummary& s) { seen.push_back(s.epoch); };
  const TrainResult r = train(toy.set, n.g, n.d, toy_config(), opt);
  CHECK(seen == std::vector<int>{1, 2, 3});
  REQUIRE(r.latest_checkpoint);
  REQUIRE(r.best_checkpoint);
  CHECK(resolve_checkpoint(dir.path(), "latest") == *r.latest_checkpoint);
  CHECK(resolve_checkpoint(dir.path(), "best") == *r.best_checkpoint);
  CHECK(load_checkpoint(*r.latest_checkpoint).info.checkpoint_id == r.epochs.back().checkpoint_id);
  int kept = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) kept += e.is_directory();
  CHECK(kept == (*r.latest_checkpoint == *r.best_checkpoint ? 1 : 2));
  CHECK(std::filesystem::exists(dir.path() / "train_log.csv"));

  testing::TempDir all("keep");
  Nets m(15);
  opt.checkpoint_dir = all.path();
  opt.keep_all_checkpoints = true;
  train(toy.set, m.g, m.d, toy_config(), opt);
  int dirs = 0;
  for (const auto& e : std::filesystem::directory_iterator(all.path())) dirs += e.is_directory();
  CHECK(dirs == 3);
}

TEST_CASE("non-finite losses raise DIVERGENCE and restore the networks", "[training]") {
  Toy toy;
  Nets n(16);
  n.g.parameters()[0]->value[0] = std::numeric_limits<float>::quiet_NaN();
  const auto d0 = flatten(n.d.parameters());
  try {
    train(toy.set, n.g, n.d, toy_config(), TrainOptions{toy.noise});
    FAIL("expected DIVERGENCE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDivergence);
  }
  CHECK(flatten(n.d.parameters()) == d0);
}

TEST_CASE("training rejects real t2 partners", "[training]") {
  Toy toy;
  Nets n(17);
  auto set = toy.set;
  set[0].partner_kind = PartnerKind::kRealT2;
  CHECK_THROWS_AS(train(set, n.g, n.d, toy_config()), Error);
  TrainConfig bad = toy_config();
  bad.epochs = 0;
  CHECK_THROWS_AS(train(toy.set, n.g, n.d, bad), Error);
}
