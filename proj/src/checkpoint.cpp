#include "s2cgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "s2cgan/error.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const GeneratorSpec& s) {
  return {{"bands", s.bands},
          {"base_channels", s.base_channels},
          {"kernel", s.kernel},
          {"leaky_slope", s.leaky_slope},
          {"noise_mode", s.noise.mode == NoiseMode::kDropout ? "dropout" : "none"},
          {"dropout_rate", s.noise.dropout_rate}};
}

json to_json(const DiscriminatorSpec& s) {
  return {{"bands", s.bands}, {"hidden_channels", s.hidden_channels}, {"leaky_slope", s.leaky_slope}};
}

GeneratorSpec generator_spec_from_json(const json& j) {
  GeneratorSpec s;
  s.bands = j.at("bands").get<int>();
  s.base_channels = j.at("base_channels").get<int>();
  s.kernel = j.at("kernel").get<int>();
  s.leaky_slope = j.at("leaky_slope").get<double>();
  s.noise.mode = j.at("noise_mode").get<std::string>() == "none" ? NoiseMode::kNone : NoiseMode::kDropout;
  s.noise.dropout_rate = j.at("dropout_rate").get<double>();
  return s;
}

DiscriminatorSpec discriminator_spec_from_json(const json& j) {
  DiscriminatorSpec s;
  s.bands = j.at("bands").get<int>();
  s.hidden_channels = j.at("hidden_channels").get<int>();
  s.leaky_slope = j.at("leaky_slope").get<double>();
  return s;
}

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

template <typename Params>
std::uint64_t hash_params(const Params& params, std::uint64_t h) {
  for (const auto* p : params) {
    const std::uint64_t ph = fnv1a64(p->value.data(), p->value.size() * sizeof(float));
    h = fnv1a64(&ph, sizeof ph) ^ (h * 0x100000001b3ULL);
  }
  return h;
}

std::string blob_name(const std::string& param_name) { return param_name + ".bin"; }

void write_blob(const fs::path& path, const std::vector<float>& values) {
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    std::memcpy(bytes.data() + 4 * i, &bits, 4);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void read_blob(const fs::path& path, std::vector<float>& values) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "missing parameter blob " + path.string());
  std::vector<char> bytes(values.size() * 4);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size() || in.peek() != EOF) {
    throw Error(ErrorCode::kCheckpointMismatch, path.string() + ": blob size does not match manifest");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    values[i] = std::bit_cast<float>(bits);
  }
}

template <typename Params>
json describe(const Params& params) {
  json arr = json::array();
  for (const auto* p : params) {
    arr.push_back({{"name", p->name}, {"shape", p->shape}, {"file", blob_name(p->name)}});
  }
  return arr;
}

template <typename Params>
void load_params(const fs::path& dir, const json& entries, const Params& params) {
  if (entries.size() != params.size()) {
    throw Error(ErrorCode::kCheckpointMismatch, "parameter count differs from architecture");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = entries[i];
    if (e.at("name").get<std::string>() != params[i]->name ||
        e.at("shape").get<std::vector<int>>() != params[i]->shape) {
      throw Error(ErrorCode::kCheckpointMismatch, "parameter " + params[i]->name + " mismatch");
    }
    read_blob(dir / e.at("file").get<std::string>(), params[i]->value);
  }
}

}  // namespace

std::string checkpoint_id_for(const Generator<float>& g, const Discriminator<float>& d, int epoch) {
  std::uint64_t h = hash_params(g.parameters(), 0x84222325ULL);
  h = hash_params(d.parameters(), h);
  char prefix[32];
  std::snprintf(prefix, sizeof prefix, "e%03d-", epoch);
  return prefix + hex64(h).substr(0, 12);
}

CheckpointInfo save_checkpoint(const fs::path& dir, const Generator<float>& g,
                               const Discriminator<float>& d, CheckpointInfo info) {
  fs::create_directories(dir);
  info.generator = g.spec();
  info.discriminator = d.spec();
  info.checkpoint_id = checkpoint_id_for(g, d, info.epoch);
  for (const auto* p : g.parameters()) write_blob(dir / blob_name(p->name), p->value);
  for (const auto* p : d.parameters()) write_blob(dir / blob_name(p->name), p->value);
  json manifest = {{"format_version", kCheckpointFormatVersion},
                   {"checkpoint_id", info.checkpoint_id},
                   {"epoch", info.epoch},
                   {"patch_size", info.patch_size},
                   {"config_hash", info.config_hash},
                   {"band_stats", band_stats_to_json(info.band_stats)},
                   {"architecture",
                    {{"generator", to_json(info.generator)}, {"discriminator", to_json(info.discriminator)}}},
                   {"parameters",
                    {{"generator", describe(g.parameters())}, {"discriminator", describe(d.parameters())}}},
                   {"dtype", "f32"},
                   {"byte_order", "little"}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
  return info;
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kIo, "no checkpoint manifest at " + manifest_path.string());
  LoadedCheckpoint ck;
  try {
    const json m = json::parse(in);
    if (m.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw Error(ErrorCode::kCheckpointMismatch, "unsupported checkpoint format version");
    }
    ck.info.generator = generator_spec_from_json(m.at("architecture").at("generator"));
    ck.info.discriminator = discriminator_spec_from_json(m.at("architecture").at("discriminator"));
    ck.info.band_stats = band_stats_from_json(m.at("band_stats"));
    ck.info.patch_size = m.at("patch_size").get<int>();
    ck.info.epoch = m.at("epoch").get<int>();
    ck.info.config_hash = m.at("config_hash").get<std::string>();
    ck.info.checkpoint_id = m.at("checkpoint_id").get<std::string>();
    ck.generator = std::make_unique<Generator<float>>(ck.info.generator);
    ck.discriminator = std::make_unique<Discriminator<float>>(ck.info.discriminator);
    load_params(dir, m.at("parameters").at("generator"), ck.generator->parameters());
    load_params(dir, m.at("parameters").at("discriminator"), ck.discriminator->parameters());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCheckpointMismatch, manifest_path.string() + ": " + e.what());
  }
  return ck;
}

fs::path resolve_checkpoint(const fs::path& path, const std::string& pointer) {
  if (fs::exists(path / "manifest.json")) return path;
  for (const fs::path& base : {path, path / "checkpoints"}) {
    const fs::path ptr = base / (pointer + ".txt");
    if (fs::exists(ptr)) {
      std::ifstream in(ptr);
      std::string name;
      std::getline(in, name);
      const fs::path target = base / name;
      if (fs::exists(target / "manifest.json")) return target;
    }
  }
  throw Error(ErrorCode::kIo, "no checkpoint found at " + path.string());
}

}  // namespace s2cgan
