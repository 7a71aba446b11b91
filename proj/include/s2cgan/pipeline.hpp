#pragma once

// End-to-end flows shared by the command-line tool and the acceptance suite.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>

#include "s2cgan/checkpoint.hpp"
#include "s2cgan/config.hpp"
#include "s2cgan/data.hpp"
#include "s2cgan/scoring.hpp"
#include "s2cgan/training.hpp"

namespace s2cgan {

struct TrainedModel {
  std::unique_ptr<Generator<float>> generator;
  std::unique_ptr<Discriminator<float>> discriminator;
  BandStats band_stats;
  int patch_size = 0;
  std::string checkpoint_id;
  TrainResult result;
};

struct TrainRunOptions {
  std::optional<std::filesystem::path> checkpoint_dir;
  bool keep_all_checkpoints = false;
  std::function<void(const EpochSummary&)> on_epoch;
};

/// Self-supervised training from the t1 acquisition alone: normalize, tile,
/// split, synthesize unchanged partners for the training tiles, and hold out
/// synthetic pairs from the test tiles for monitoring.
TrainedModel train_from_t1(const Raster& x1_raw, const RunConfig& cfg, const TrainRunOptions& options = {});

/// Same as train_from_t1(scene.x1, ...); scene.x2 is never touched.
TrainedModel train_from_scene(const BitemporalScene& scene, const RunConfig& cfg,
                              const TrainRunOptions& options = {});

DetectOptions detect_options(const RunConfig& cfg);

Detection detect(const BitemporalScene& scene, TrainedModel& model, const RunConfig& cfg);
Detection detect(const BitemporalScene& scene, LoadedCheckpoint& ck, const RunConfig& cfg);

}  // namespace s2cgan
