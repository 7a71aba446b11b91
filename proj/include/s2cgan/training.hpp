#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s2cgan/checkpoint.hpp"
#include "s2cgan/data.hpp"
#include "s2cgan/networks.hpp"
#include "s2cgan/pairs.hpp"

namespace s2cgan {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 8;
  double momentum = 0.5;
  double learning_rate_g = 0.01;
  double learning_rate_d = 0.01;
  double lambda_l1 = 100.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainStep {
  int epoch = 0;
  int step = 0;
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_l1 = 0.0;
  double d_real = 0.0;
  double d_fake = 0.0;
};

struct TrainLog {
  TrainConfig config;
  std::vector<TrainStep> steps;

  /// CSV with header epoch,step,d_loss,g_adv,g_l1,d_real,d_fake.
  void write_csv(const std::filesystem::path& path) const;
};

struct EpochSummary {
  int epoch = 0;
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_l1 = 0.0;
  double d_real = 0.0;
  double d_fake = 0.0;
  std::optional<double> held_out_l1;
  std::string checkpoint_id;
};

struct TrainOptions {
  NoiseSpec noise;
  /// Synthetic unchanged pairs used to monitor generalization; never trained on.
  std::vector<PatchPair> held_out;
  /// When set, a checkpoint is written after every epoch and the
  /// latest.txt / best.txt pointers are refreshed.
  std::optional<std::filesystem::path> checkpoint_dir;
  bool keep_all_checkpoints = false;
  CheckpointInfo checkpoint_info;
  std::function<void(const EpochSummary&)> on_epoch;
};

struct TrainResult {
  TrainLog log;
  std::vector<EpochSummary> epochs;
  std::optional<std::filesystem::path> latest_checkpoint;
  std::optional<std::filesystem::path> best_checkpoint;
};

/// Momentum SGD: v <- momentum * v + grad; value <- value - lr * v.
void sgd_step(const std::vector<Parameter<float>*>& params, double learning_rate, double momentum);

/// Mean L1 between synthetic partners and G(x1) over a set of pairs, with a
/// fixed noise realization per pair.
double held_out_l1(Generator<float>& g, std::span<const PatchPair> pairs, int batch_size,
                   std::uint64_t seed);

/// Adversarial training on self-supervised unchanged pairs: per batch one
/// discriminator update on (x1, x2~) vs (x1, G(x1, z)), then one generator
/// update. Partners are re-synthesized from x1 every epoch after the first.
/// Throws DIVERGENCE on a non-finite loss after restoring the networks to
/// the last completed epoch.
TrainResult train(std::span<const PatchPair> training_set, Generator<float>& g,
                  Discriminator<float>& d, const TrainConfig& cfg, const TrainOptions& options = {});

}  // namespace s2cgan
