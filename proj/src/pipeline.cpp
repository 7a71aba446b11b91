#include "s2cgan/pipeline.hpp"

#include "s2cgan/error.hpp"
#include "s2cgan/pairs.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

namespace {

constexpr std::uint64_t kGeneratorInitStream = 1;
constexpr std::uint64_t kDiscriminatorInitStream = 2;
constexpr std::uint64_t kHeldOutNoiseStream = 0x4E1D;

}  // namespace

TrainedModel train_from_t1(const Raster& x1_raw, const RunConfig& cfg, const TrainRunOptions& options) {
  cfg.validate();
  TrainedModel model;
  model.band_stats = compute_band_stats(x1_raw);
  model.patch_size = cfg.data.patch_size;
  const Raster x1 = normalize_raster(x1_raw, model.band_stats);
  const std::vector<Patch> patches = tile_raster(x1, cfg.data.patch_size);
  const SplitSpec s = split(patches.size(), cfg.data.train_fraction, cfg.data.split_seed);
  if (s.train_ids.empty()) throw Error(ErrorCode::kSceneTooSmall, "no training patches after the split");
  const std::vector<PatchPair> training_set = build_training_set(patches, s, cfg.noise);

  TrainOptions topt;
  topt.noise = cfg.noise;
  SplitSpec held = s;
  held.train_ids = s.test_ids;
  NoiseSpec held_noise = cfg.noise;
  held_noise.seed = derive_seed(cfg.noise.seed, {kHeldOutNoiseStream});
  topt.held_out = build_training_set(patches, held, held_noise);
  topt.checkpoint_dir = options.checkpoint_dir;
  topt.keep_all_checkpoints = options.keep_all_checkpoints;
  topt.on_epoch = options.on_epoch;
  topt.checkpoint_info.band_stats = model.band_stats;
  topt.checkpoint_info.patch_size = cfg.data.patch_size;
  topt.checkpoint_info.config_hash = config_hash(to_json(cfg));

  GeneratorSpec gs = cfg.generator;
  gs.bands = x1.bands();
  DiscriminatorSpec ds = cfg.discriminator;
  ds.bands = x1.bands();
  model.generator = std::make_unique<Generator<float>>(gs);
  model.discriminator = std::make_unique<Discriminator<float>>(ds);
  init_params(model.generator->parameters(), derive_seed(cfg.train.seed, {kGeneratorInitStream}));
  init_params(model.discriminator->parameters(), derive_seed(cfg.train.seed, {kDiscriminatorInitStream}));

  model.result = train(training_set, *model.generator, *model.discriminator, cfg.train, topt);
  model.checkpoint_id = model.result.epochs.back().checkpoint_id;
  return model;
}

TrainedModel train_from_scene(const BitemporalScene& scene, const RunConfig& cfg, const TrainRunOptions& options) {
  return train_from_t1(scene.x1, cfg, options);
}

DetectOptions detect_options(const RunConfig& cfg) {
  DetectOptions o;
  o.fusion = cfg.fusion;
  o.policy = cfg.threshold;
  o.stochastic = cfg.stochastic_inference;
  o.noise_seed = cfg.inference_seed;
  o.batch_size = cfg.train.batch_size;
  return o;
}

Detection detect(const BitemporalScene& scene, TrainedModel& model, const RunConfig& cfg) {
  Detection det = detect_scene(scene, *model.generator, *model.discriminator, model.band_stats,
                               model.patch_size, detect_options(cfg));
  det.change_map.checkpoint_id = model.checkpoint_id;
  det.change_map.config_hash = config_hash(to_json(cfg));
  return det;
}

Detection detect(const BitemporalScene& scene, LoadedCheckpoint& ck, const RunConfig& cfg) {
  Detection det = detect_scene(scene, *ck.generator, *ck.discriminator, ck.info.band_stats,
                               ck.info.patch_size, detect_options(cfg));
  det.change_map.checkpoint_id = ck.info.checkpoint_id;
  det.change_map.config_hash = config_hash(to_json(cfg));
  return det;
}

}  // namespace s2cgan
