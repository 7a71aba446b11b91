#pragma once

// Checkpoint container: a directory holding manifest.json plus one raw
// float32 little-endian blob per parameter. The manifest records the
// architecture, the band statistics the networks were trained under, and the
// configuration hash, so detection can refuse incompatible inputs.

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "s2cgan/networks.hpp"
#include "s2cgan/raster.hpp"

namespace s2cgan {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointInfo {
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;
  BandStats band_stats;
  int patch_size = 128;
  int epoch = 0;
  std::string config_hash;
  std::string checkpoint_id;  // filled on save
};

struct LoadedCheckpoint {
  CheckpointInfo info;
  std::unique_ptr<Generator<float>> generator;
  std::unique_ptr<Discriminator<float>> discriminator;
};

nlohmann::json to_json(const GeneratorSpec& spec);
nlohmann::json to_json(const DiscriminatorSpec& spec);
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);
DiscriminatorSpec discriminator_spec_from_json(const nlohmann::json& j);

/// Content-derived identifier of the parameter values.
std::string checkpoint_id_for(const Generator<float>& g, const Discriminator<float>& d, int epoch);

/// Writes the checkpoint; returns the info with checkpoint_id set.
CheckpointInfo save_checkpoint(const std::filesystem::path& dir, const Generator<float>& g,
                               const Discriminator<float>& d, CheckpointInfo info);

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

/// Resolves a training output directory ("latest"/"best" pointers) or a
/// checkpoint directory to the checkpoint directory itself.
std::filesystem::path resolve_checkpoint(const std::filesystem::path& path,
                                         const std::string& pointer = "latest");

}  // namespace s2cgan
