#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "s2cgan/networks.hpp"
#include "s2cgan/pairs.hpp"
#include "s2cgan/scoring.hpp"
#include "s2cgan/training.hpp"

namespace s2cgan {

/// Parses the TOML subset used by run configurations: [table] and
/// [table.sub] headers, bare or quoted keys, basic strings, integers,
/// floats, booleans and single-line arrays of those. Throws INVALID_ARGUMENT
/// with the line number on anything else.
nlohmann::json parse_toml(std::string_view text);
nlohmann::json load_toml(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical (sorted-key, compact) dump.
std::string config_hash(const nlohmann::json& config);

struct DataConfig {
  int patch_size = 128;
  double train_fraction = 0.5;
  std::uint64_t split_seed = 0;
};

/// Every knob of a run. Defaults reproduce the reference experiment setup.
struct RunConfig {
  DataConfig data;
  NoiseSpec noise;
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;
  TrainConfig train;
  ThresholdPolicy threshold;
  FusionMode fusion = FusionMode::kPolarityAligned;
  bool stochastic_inference = true;
  std::uint64_t inference_seed = 0;

  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace s2cgan
