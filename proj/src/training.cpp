#include "s2cgan/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "s2cgan/batch.hpp"
#include "s2cgan/error.hpp"
#include "s2cgan/losses.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(lambda_l1 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda_l1 must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "momentum must lie in [0, 1)");
  }
  if (!(learning_rate_g >= 0.0) || !(learning_rate_d >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rates must be >= 0");
  }
}

void TrainLog::write_csv(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "epoch,step,d_loss,g_adv,g_l1,d_real,d_fake\n";
  char line[256];
  for (const auto& s : steps) {
    std::snprintf(line, sizeof line, "%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.epoch, s.step, s.d_loss,
                  s.g_adv, s.g_l1, s.d_real, s.d_fake);
    out << line;
  }
}

void sgd_step(const std::vector<Parameter<float>*>& params, double learning_rate, double momentum) {
  const auto mu = static_cast<float>(momentum);
  const auto lr = static_cast<float>(learning_rate);
  for (auto* p : params) {
    float* v = p->velocity.data();
    float* w = p->value.data();
    const float* g = p->grad.data();
    const std::size_t n = p->size();
#pragma omp parallel for simd schedule(static)
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = mu * v[k] + g[k];
      w[k] -= lr * v[k];
    }
  }
}

namespace {

constexpr std::uint64_t kShuffleStream = 0x0DE;
constexpr std::uint64_t kTrainNoiseStream = 0xD0;
constexpr std::uint64_t kHeldOutStream = 0xE7A1;

struct Snapshot {
  std::vector<std::vector<float>> values;
  std::vector<std::vector<float>> velocities;
};

Snapshot take_snapshot(const std::vector<Parameter<float>*>& params) {
  Snapshot s;
  for (const auto* p : params) {
    s.values.push_back(p->value);
    s.velocities.push_back(p->velocity);
  }
  return s;
}

void restore_snapshot(const Snapshot& s, const std::vector<Parameter<float>*>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = s.values[i];
    params[i]->velocity = s.velocities[i];
    params[i]->zero_grad();
  }
}

double mean_of(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void write_pointer(const fs::path& dir, const std::string& name, const std::string& target) {
  std::ofstream out(dir / (name + ".txt"), std::ios::trunc);
  out << target << "\n";
}

std::string epoch_dir_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%03d", epoch);
  return buf;
}

}  // namespace

double held_out_l1(Generator<float>& g, std::span<const PatchPair> pairs, int batch_size,
                   std::uint64_t seed) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < pairs.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(pairs.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<const Raster*> x1s;
    std::vector<const Raster*> x2s;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = start; i < end; ++i) {
      x1s.push_back(&pairs[i].x1_patch);
      x2s.push_back(&pairs[i].partner);
      seeds.push_back(derive_seed(seed, {pairs[i].index, kHeldOutStream}));
    }
    const Tensor<float> x1 = stack_rasters(x1s);
    const Tensor<float> x2 = stack_rasters(x2s);
    const Tensor<float> r = g.forward(x1, seeds);
    total += loss_l1<float>(x2.values(), r.values()) * static_cast<double>(x2.size());
    count += x2.size();
  }
  return total / static_cast<double>(count);
}

TrainResult train(std::span<const PatchPair> training_set, Generator<float>& g,
                  Discriminator<float>& d, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  options.noise.validate();
  if (training_set.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  for (const auto& p : training_set) {
    if (p.partner_kind != PartnerKind::kSyntheticUnchanged) {
      throw Error(ErrorCode::kInvalidArgument, "training pairs must be synthetic unchanged pairs");
    }
  }

  TrainResult result;
  result.log.config = cfg;
  const auto g_params = g.parameters();
  const auto d_params = d.parameters();
  Snapshot g_good = take_snapshot(g_params);
  Snapshot d_good = take_snapshot(d_params);
  std::optional<double> best_score;
  std::optional<fs::path> best_dir;
  std::vector<fs::path> saved_dirs;

  std::vector<std::size_t> order(training_set.size());
  const auto n = static_cast<int>(training_set.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Engine shuffle_engine = make_engine(cfg.seed, {static_cast<std::uint64_t>(epoch), kShuffleStream});
    std::shuffle(order.begin(), order.end(), shuffle_engine);

    EpochSummary summary;
    summary.epoch = epoch;
    int steps = 0;
    for (int start = 0; start < n; start += cfg.batch_size, ++steps) {
      const int end = std::min(n, start + cfg.batch_size);
      std::vector<const Raster*> x1s;
      std::vector<Raster> resampled;
      resampled.reserve(static_cast<std::size_t>(end - start));
      std::vector<const Raster*> x2s;
      std::vector<std::uint64_t> seeds;
      for (int i = start; i < end; ++i) {
        const PatchPair& pair = training_set[order[static_cast<std::size_t>(i)]];
        x1s.push_back(&pair.x1_patch);
        if (epoch == 1) {
          x2s.push_back(&pair.partner);
        } else {
          // Fresh noise realization each epoch.
          resampled.push_back(synthesize_unchanged(pair.x1_patch, options.noise,
                                                   {pair.index, static_cast<std::uint64_t>(epoch - 1)}));
          x2s.push_back(&resampled.back());
        }
        seeds.push_back(derive_seed(cfg.seed, {static_cast<std::uint64_t>(epoch),
                                               static_cast<std::uint64_t>(steps),
                                               static_cast<std::uint64_t>(i - start), kTrainNoiseStream}));
      }
      const Tensor<float> x1 = stack_rasters(x1s);
      const Tensor<float> x2 = stack_rasters(x2s);

      const Tensor<float> fake = g.forward(x1, seeds);

      // Discriminator update; G is held fixed.
      d.zero_grad();
      const Tensor<float> real_map = d.forward(x1, x2);
      Tensor<float> grad_real(real_map.n(), 1, real_map.h(), real_map.w());
      loss_cgan_d_real_grad<float>(real_map.values(), grad_real.values());
      d.backward(grad_real);
      const Tensor<float> fake_map = d.forward(x1, fake);
      Tensor<float> grad_fake(fake_map.n(), 1, fake_map.h(), fake_map.w());
      loss_cgan_d_fake_grad<float>(fake_map.values(), grad_fake.values());
      d.backward(grad_fake);
      const double d_loss = loss_cgan_d<float>(real_map.values(), fake_map.values());
      sgd_step(d_params, cfg.learning_rate_d, cfg.momentum);

      // Generator update against the refreshed discriminator.
      g.zero_grad();
      const Tensor<float> fake_map_g = d.forward(x1, fake);
      Tensor<float> grad_adv(fake_map_g.n(), 1, fake_map_g.h(), fake_map_g.w());
      loss_g_adv_grad<float>(fake_map_g.values(), grad_adv.values());
      const double g_adv = loss_g_adv<float>(fake_map_g.values());
      Tensor<float> grad_candidate = d.backward(grad_adv);
      d.zero_grad();
      add_loss_l1_grad<float>(x2.values(), fake.values(), cfg.lambda_l1, grad_candidate.values());
      const double g_l1 = loss_l1<float>(x2.values(), fake.values());
      g.backward(grad_candidate);
      sgd_step(g_params, cfg.learning_rate_g, cfg.momentum);

      TrainStep rec{epoch, steps, d_loss, g_adv, g_l1, mean_of(real_map.values()), mean_of(fake_map.values())};
      result.log.steps.push_back(rec);

      if (!std::isfinite(d_loss) || !std::isfinite(g_adv) || !std::isfinite(g_l1)) {
        restore_snapshot(g_good, g_params);
        restore_snapshot(d_good, d_params);
        if (options.checkpoint_dir) result.log.write_csv(*options.checkpoint_dir / "train_log.csv");
        throw Error(ErrorCode::kDivergence, "non-finite loss at epoch " + std::to_string(epoch) +
                                                " step " + std::to_string(steps) +
                                                "; networks restored to the last completed epoch");
      }
      summary.d_loss += d_loss;
      summary.g_adv += g_adv;
      summary.g_l1 += g_l1;
      summary.d_real += rec.d_real;
      summary.d_fake += rec.d_fake;
    }
    summary.d_loss /= steps;
    summary.g_adv /= steps;
    summary.g_l1 /= steps;
    summary.d_real /= steps;
    summary.d_fake /= steps;
    if (!options.held_out.empty()) {
      summary.held_out_l1 = held_out_l1(g, options.held_out, cfg.batch_size, cfg.seed);
    }

    g_good = take_snapshot(g_params);
    d_good = take_snapshot(d_params);

    if (options.checkpoint_dir) {
      const fs::path root = *options.checkpoint_dir;
      const fs::path dir = root / epoch_dir_name(epoch);
      CheckpointInfo info = options.checkpoint_info;
      info.epoch = epoch;
      info = save_checkpoint(dir, g, d, info);
      summary.checkpoint_id = info.checkpoint_id;
      const double score = summary.held_out_l1.value_or(summary.g_l1);
      result.latest_checkpoint = dir;
      write_pointer(root, "latest", dir.filename().string());
      if (!best_score || score < *best_score) {
        best_score = score;
        best_dir = dir;
        write_pointer(root, "best", dir.filename().string());
      }
      saved_dirs.push_back(dir);
      if (!options.keep_all_checkpoints) {
        std::erase_if(saved_dirs, [&](const fs::path& p) {
          if (p == dir || p == *best_dir) return false;
          fs::remove_all(p);
          return true;
        });
      }
      result.best_checkpoint = best_dir;
    } else {
      summary.checkpoint_id = checkpoint_id_for(g, d, epoch);
    }
    result.epochs.push_back(summary);
    if (options.on_epoch) options.on_epoch(summary);
  }
  if (options.checkpoint_dir) result.log.write_csv(*options.checkpoint_dir / "train_log.csv");
  return result;
}

}  // namespace s2cgan
