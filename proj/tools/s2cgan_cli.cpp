// s2cgan: synth / train / detect / eval.
//
// Exit codes: 0 success, 2 usage or input error, 3 training divergence.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "s2cgan/checkpoint.hpp"
#include "s2cgan/config.hpp"
#include "s2cgan/data.hpp"
#include "s2cgan/error.hpp"
#include "s2cgan/kernels.hpp"
#include "s2cgan/metrics.hpp"
#include "s2cgan/pipeline.hpp"
#include "s2cgan/synthbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace s2cgan;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitDivergence = 3;

struct Common {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "TOML run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Base seed");
  cmd->add_option("--threads", c.threads, "Worker threads (1 = bit-exact reproducible)")->check(CLI::NonNegativeNumber);
}

json load_config_tree(const Common& c) { return c.config ? load_toml(*c.config) : json::object(); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// 8-bit panel of a score map, min-max stretched.
void write_panel(const fs::path& path, const ScoreRaster& s) {
  std::vector<std::uint8_t> px(s.values.size(), 0);
  if (!s.values.empty()) {
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    const double range = static_cast<double>(*hi) - *lo;
    for (std::size_t i = 0; i < px.size(); ++i) {
      px[i] = range > 0.0 ? static_cast<std::uint8_t>(std::lround(255.0 * (s.values[i] - *lo) / range)) : 0;
    }
  }
  write_png_gray(path, s.height, s.width, px);
}

void write_score(const fs::path& dir, const std::string& name, const ScoreRaster& s, const json& prov) {
  Raster r(s.height, s.width, 1);
  std::copy(s.values.begin(), s.values.end(), r.mutable_values().begin());
  json p = prov;
  p["kind"] = std::string(to_string(s.kind));
  p["polarity"] = s.polarity == Polarity::kHighMeansChange ? "high_means_change" : "low_means_change";
  write_raster(dir / (name + ".f32"), r, p);
  write_panel(dir / (name + ".png"), s);
}

void write_mask_png(const fs::path& path, const BinaryMask& m) {
  std::vector<std::uint8_t> px(m.values.size());
  std::transform(m.values.begin(), m.values.end(), px.begin(), [](std::uint8_t v) { return v ? 255 : 0; });
  write_png_gray(path, m.height, m.width, px);
}

// --------------------------------------------------------------------------

struct SynthArgs {
  std::string scenario;
  fs::path out;
  std::optional<std::uint64_t> seed;
  bool list = false;
};

int cmd_synth(const SynthArgs& a) {
  if (a.list) {
    for (const auto& s : standard_suite()) {
      std::printf("%-20s change %.3f-%.3f\n", s.spec.name.c_str(), s.min_change_fraction, s.max_change_fraction);
    }
    return 0;
  }
  auto scenario = find_scenario(a.scenario);
  if (!scenario) {
    std::fprintf(stderr, "error: unknown scenario '%s' (see synth --list)\n", a.scenario.c_str());
    return kExitInput;
  }
  if (a.out.empty()) {
    std::fprintf(stderr, "error: --out is required\n");
    return kExitInput;
  }
  SynthSpec spec = scenario->spec;
  if (a.seed) spec.seed = *a.seed;
  const BitemporalScene scene = generate(spec);
  fs::create_directories(a.out);
  const json desc = {{"scenario", spec.name},
                     {"suite_version", kSuiteVersion},
                     {"height", spec.height},
                     {"width", spec.width},
                     {"bands", spec.bands},
                     {"blobs", spec.blobs.size()},
                     {"noise_sigma", spec.noise_sigma},
                     {"change_fraction", scene.reference_mask->fraction()}};
  const json prov = {{"config_hash", config_hash(desc)}, {"seed", spec.seed}, {"checkpoint_id", nullptr}};
  write_raster(a.out / "x1.f32", scene.x1, prov);
  write_raster(a.out / "x2.f32", scene.x2, prov);
  write_mask(a.out / "mask.u8", *scene.reference_mask, prov);
  write_mask_png(a.out / "mask.png", *scene.reference_mask);
  write_json(a.out / "scene.json", desc);
  std::printf("%s: %dx%dx%d, change fraction %.4f -> %s\n", spec.name.c_str(), spec.height, spec.width,
              spec.bands, scene.reference_mask->fraction(), a.out.string().c_str());
  return 0;
}

// --------------------------------------------------------------------------

struct TrainArgs {
  Common common;
  fs::path x1;
  fs::path out;
  std::optional<int> epochs;
  std::optional<int> patch_size;
  bool keep_all = false;
};

int cmd_train(const TrainArgs& a) {
  json tree = load_config_tree(a.common);
  if (a.epochs) tree["train"]["epochs"] = *a.epochs;
  if (a.patch_size) tree["data"]["patch_size"] = *a.patch_size;
  if (a.common.seed) {
    tree["train"]["seed"] = *a.common.seed;
    tree["noise"]["seed"] = *a.common.seed;
    tree["data"]["split_seed"] = *a.common.seed;
  }
  const RunConfig cfg = run_config_from_json(tree);
  const Raster x1 = read_raster(a.x1);
  fs::create_directories(a.out);
  const json cfg_json = to_json(cfg);
  write_json(a.out / "train_config.json",
             {{"config", cfg_json}, {"config_hash", config_hash(cfg_json)}, {"seed", cfg.train.seed},
              {"x1", fs::absolute(a.x1).string()}});

  std::ofstream epochs(a.out / "epochs.csv", std::ios::trunc);
  epochs << "epoch,d_loss,g_adv,g_l1,held_out_l1,d_real,d_fake,checkpoint_id\n";
  TrainRunOptions opt;
  opt.checkpoint_dir = a.out / "checkpoints";
  opt.keep_all_checkpoints = a.keep_all;
  opt.on_epoch = [&](const EpochSummary& s) {
    char line[256];
    std::snprintf(line, sizeof line, "%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%s\n", s.epoch, s.d_loss, s.g_adv, s.g_l1,
                  s.held_out_l1.value_or(-1.0), s.d_real, s.d_fake, s.checkpoint_id.c_str());
    epochs << line << std::flush;
    std::printf("epoch %3d  d %.4f  g_adv %.4f  l1 %.4f  held-out l1 %.4f  D(real) %.3f  D(fake) %.3f\n", s.epoch,
                s.d_loss, s.g_adv, s.g_l1, s.held_out_l1.value_or(-1.0), s.d_real, s.d_fake);
    std::fflush(stdout);
  };
  const TrainedModel model = train_from_t1(x1, cfg, opt);
  std::printf("checkpoint %s -> %s\n", model.checkpoint_id.c_str(), opt.checkpoint_dir->string().c_str());
  return 0;
}

// --------------------------------------------------------------------------

struct DetectArgs {
  Common common;
  fs::path x1;
  fs::path x2;
  fs::path checkpoint;
  std::string pointer = "latest";
  fs::path out;
  std::optional<std::string> mode;
  std::optional<std::string> threshold;
  bool dump = false;
};

int cmd_detect(const DetectArgs& a) {
  json tree = load_config_tree(a.common);
  if (a.mode) tree["detect"]["fusion"] = *a.mode;
  if (a.threshold) tree["threshold"]["mode"] = *a.threshold;
  if (a.common.seed) tree["detect"]["noise_seed"] = *a.common.seed;
  const RunConfig cfg = run_config_from_json(tree);

  LoadedCheckpoint ck = load_checkpoint(resolve_checkpoint(a.checkpoint, a.pointer));
  const BitemporalScene scene = load_scene(a.x1, a.x2);
  if (scene.bands() != ck.info.generator.bands) {
    throw Error(ErrorCode::kCheckpointMismatch, "checkpoint expects " + std::to_string(ck.info.generator.bands) +
                                                    " bands, scene has " + std::to_string(scene.bands()));
  }
  const Detection det = detect(scene, ck, cfg);

  fs::create_directories(a.out);
  const json prov = {{"config_hash", det.change_map.config_hash},
                     {"seed", cfg.inference_seed},
                     {"checkpoint_id", det.change_map.checkpoint_id},
                     {"fusion", std::string(to_string(cfg.fusion))},
                     {"threshold", std::string(to_string(cfg.threshold.mode))}};
  write_mask(a.out / "change_map.u8", det.change_map.mask, prov);
  write_mask_png(a.out / "change_map.png", det.change_map.mask);
  if (a.dump) {
    write_score(a.out, "e_r", det.e_r, prov);
    write_score(a.out, "s_real", det.s_real, prov);
    write_score(a.out, "s_gen", det.s_gen, prov);
    write_score(a.out, "s_dif", det.s_dif, prov);
    write_score(a.out, "h", det.h, prov);
  }
  if (det.h.degenerate) std::fprintf(stderr, "warning: %s: fused map is degenerate (constant input)\n",
                                     std::string(to_string(ErrorCode::kDegenerateMap)).c_str());
  std::printf("change fraction %.4f (%dx%d) -> %s\n", det.change_map.mask.fraction(), det.change_map.mask.height,
              det.change_map.mask.width, (a.out / "change_map.u8").string().c_str());
  return 0;
}

// --------------------------------------------------------------------------

struct EvalArgs {
  fs::path pred;
  fs::path ref;
  std::optional<fs::path> out;
  bool crop = false;
};

int cmd_eval(const EvalArgs& a) {
  const BinaryMask pred = read_mask(a.pred);
  BinaryMask ref = read_mask(a.ref);
  if (a.crop && ref.height >= pred.height && ref.width >= pred.width) ref = crop(ref, pred.height, pred.width);
  const MetricsReport r = report(confusion(pred, ref));
  std::cout << format_table(r);
  const json j = to_json(r);
  if (a.out) {
    if (a.out->has_parent_path()) fs::create_directories(a.out->parent_path());
    write_json(*a.out, j);
  } else {
    std::cout << j.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised conditional-GAN change detection"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic benchmark scene");
  c_synth->add_option("--scenario", synth.scenario, "Scenario name");
  c_synth->add_option("--out", synth.out, "Output directory");
  c_synth->add_option("--seed", synth.seed, "Override the scenario seed");
  c_synth->add_flag("--list", synth.list, "List scenarios");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Self-supervised training from the t1 image");
  c_train->add_option("--x1", train.x1, "t1 raster")->required();
  c_train->add_option("--out", train.out, "Run directory")->required();
  c_train->add_option("--epochs", train.epochs, "Epochs (default 50)");
  c_train->add_option("--patch-size", train.patch_size, "Patch size (default 128)");
  c_train->add_flag("--keep-all", train.keep_all, "Keep every epoch's checkpoint");
  add_common(c_train, train.common);

  DetectArgs det;
  auto* c_detect = app.add_subcommand("detect", "Detect changes between two acquisitions");
  c_detect->add_option("--x1", det.x1, "t1 raster")->required();
  c_detect->add_option("--x2", det.x2, "t2 raster")->required();
  c_detect->add_option("--checkpoint", det.checkpoint, "Checkpoint or run directory")->required();
  c_detect->add_option("--pointer", det.pointer, "latest or best")->check(CLI::IsMember({"latest", "best"}));
  c_detect->add_option("--out", det.out, "Output directory")->required();
  c_detect->add_option("--mode", det.mode, "Fusion mode")->check(CLI::IsMember({"literal", "aligned"}));
  c_detect->add_option("--threshold", det.threshold, "Threshold mode")->check(CLI::IsMember({"otsu", "local"}));
  c_detect->add_flag("--dump-intermediates", det.dump, "Write e_r, S maps, S_dif and H");
  add_common(c_detect, det.common);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Score a change map against a reference mask");
  c_eval->add_option("--pred", ev.pred, "Predicted change map")->required();
  c_eval->add_option("--ref", ev.ref, "Reference mask")->required();
  c_eval->add_option("--out", ev.out, "JSON report path");
  c_eval->add_flag("--crop", ev.crop, "Crop the reference to the prediction's extent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  const auto threads = [](const Common& c) {
    if (c.threads > 0) set_thread_count(c.threads);
  };
  try {
    if (c_synth->parsed()) return cmd_synth(synth);
    if (c_train->parsed()) {
      threads(train.common);
      return cmd_train(train);
    }
    if (c_detect->parsed()) {
      threads(det.common);
      return cmd_detect(det);
    }
    if (c_eval->parsed()) return cmd_eval(ev);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return e.code() == ErrorCode::kDivergence ? kExitDivergence : kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
