// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "s2cgan/config.hpp"
#include "s2cgan/kernels.hpp"
#include "s2cgan/losses.hpp"
#include "s2cgan/metrics.hpp"
#include "s2cgan/pairs.hpp"
#include "s2cgan/pipeline.hpp"
#include "s2cgan/synthbench.hpp"
#include "support/gradchecks.hpp"
#include "support/helpers.hpp"

using namespace s2cgan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1 -------------------------------------------------------------------------

Outcome metric_consistency() {
  // Counts over 10^4 pixels realizing each published OA; ERR must follow.
  const std::pair<double, double> rows[] = {{0.8633, 0.1366}, {0.8280, 0.1719}, {0.8482, 0.1517}};
  double worst = 0.0;
  for (const auto& [oa, err] : rows) {
    const auto correct = static_cast<std::uint64_t>(std::llround(oa * 10000));
    const MetricsReport r = report({correct / 2, correct - correct / 2, (10000 - correct) / 2,
                                    (10000 - correct) - (10000 - correct) / 2});
    worst = std::max({worst, std::abs(*r.err - err), std::abs(*r.oa + *r.err - 1.0)});
  }
  return {worst <= 2e-4, "max |ERR - (1 - OA)| deviation " + fmt("%.2e", worst)};
}

// 2 -------------------------------------------------------------------------

Outcome loss_oracles() {
  std::mt19937_64 eng(2);
  std::uniform_int_distribution<int> dim(1, 8), bands(1, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = static_cast<std::size_t>(dim(eng)) * dim(eng) * bands(eng);
    const auto t = testing::random_vector(n, eng());
    const auto r = testing::random_vector(n, eng());
    const auto dr = testing::random_vector(n, eng(), 1e-4, 1.0 - 1e-4);
    const auto df = testing::random_vector(n, eng(), 1e-4, 1.0 - 1e-4);
    double l1 = 0.0, real = 0.0, fake = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      l1 += std::abs(t[i] - r[i]);
      real += std::log(dr[i]);
      fake += std::log(1.0 - df[i]);
    }
    worst = std::max(worst, std::abs(loss_l1<double>(t, r) - l1 / n));
    worst = std::max(worst, std::abs(loss_cgan_d<double>(dr, df) + real / n + fake / n));
  }
  return {worst <= 1e-6, "max abs deviation over 100 tensors " + fmt("%.2e", worst)};
}

// 3 -------------------------------------------------------------------------

Outcome gradient_checks() {
  double worst = 0.0;
  std::string where;
  for (const auto& r : testing::layer_gradient_suite()) {
    if (r.worst > worst) {
      worst = r.worst;
      where = r.name;
    }
  }
  const double g = testing::generator_objective_grad_error();
  const double d = testing::discriminator_objective_grad_error();
  if (g > worst) {
    worst = g;
    where = "generator objective";
  }
  if (d > worst) {
    worst = d;
    where = "discriminator objective";
  }
  return {worst <= 1e-3, "worst relative error " + fmt("%.2e", worst) + " (" + where + ")"};
}

// 4 -------------------------------------------------------------------------

Outcome shape_invariants() {
  const int p = 32;
  GeneratorSpec gs;
  gs.base_channels = 16;
  Generator<float> g(gs);
  init_params(g.parameters(), 4);
  for (auto* prm : g.parameters()) {
    for (float& v : prm->value) v *= 50.0f;  // push the output into saturation
  }
  const auto x = testing::random_tensor<float>(2, 3, p, p, 5);
  const std::vector<std::uint64_t> seeds = {1, 2};
  const Tensor<float> y = g.forward(x, seeds);
  bool ok = y.shape() == x.shape();
  for (float v : y.values()) ok = ok && v >= -1.0f && v <= 1.0f;

  Discriminator<double> d(DiscriminatorSpec{});
  init_params(d.parameters(), 6);
  auto a = testing::random_tensor<double>(1, 3, p, p, 7);
  const auto b = testing::random_tensor<double>(1, 3, p, p, 8);
  const Tensor<double> s = d.forward(a, b);
  ok = ok && s.shape() == std::array<int, 4>{1, 1, p, p};
  for (double v : s.values()) ok = ok && v > 0.0 && v < 1.0;
  a.at(0, 2, 9, 17) += 0.75;
  const Tensor<double> moved = d.forward(a, b);
  int changed = 0;
  for (std::size_t i = 0; i < s.size(); ++i) changed += moved.values()[i] != s.values()[i];
  ok = ok && changed == 1 && moved.at(0, 0, 9, 17) != s.at(0, 0, 9, 17);
  return {ok, "G 2x3x32x32 in [-1,1]; D 32x32 in (0,1); perturbation moved " + std::to_string(changed) + " pixel(s)"};
}

// 5 -------------------------------------------------------------------------

Outcome noise_synthesis() {
  Raster x(1000, 1000, 1);
  const auto v = testing::random_vector(x.size(), 9, -0.5, 0.5);
  std::copy(v.begin(), v.end(), x.mutable_values().begin());
  const Raster same = synthesize_unchanged(x, NoiseSpec{0.0, 1});
  const bool identity = std::equal(same.values().begin(), same.values().end(), x.values().begin());
  const Raster y = synthesize_unchanged(x, NoiseSpec{0.05, 1});
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(y.values()[i]) - x.values()[i];
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  const Raster y2 = synthesize_unchanged(x, NoiseSpec{0.05, 1});
  const bool repro = std::equal(y.values().begin(), y.values().end(), y2.values().begin());
  const double rel = std::abs(sd - 0.05) / 0.05;
  return {identity && repro && rel <= 0.01,
          "sigma 0 identity " + std::string(identity ? "yes" : "no") + ", empirical std " + fmt("%.5f", sd) +
              " (rel err " + fmt("%.4f", rel) + "), reproducible " + (repro ? "yes" : "no")};
}

// 6 -------------------------------------------------------------------------

int brute_force_cut(const Histogram& h) {
  double total = 0.0;
  for (auto c : h) total += static_cast<double>(c);
  int best = 1;
  double best_var = -1.0;
  for (int k = 1; k < kHistogramBins; ++k) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int i = 0; i < kHistogramBins; ++i) {
      const double c = static_cast<double>(h[static_cast<std::size_t>(i)]);
      (i < k ? n0 : n1) += c;
      (i < k ? s0 : s1) += c * i;
    }
    const double var = (n0 > 0 && n1 > 0) ? (n0 / total) * (n1 / total) * std::pow(s0 / n0 - s1 / n1, 2) : 0.0;
    if (var > best_var * (1.0 + 1e-12) + 1e-300) {
      best_var = var;
      best = k;
    }
  }
  return best;
}

Outcome otsu_equivalence() {
  std::mt19937_64 eng(6);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    // A random 8-bit image: a mixture of two clipped Gaussians plus uniform clutter.
    std::normal_distribution<double> a(static_cast<double>(eng() % 256), 5.0 + static_cast<double>(eng() % 40));
    std::normal_distribution<double> b(static_cast<double>(eng() % 256), 5.0 + static_cast<double>(eng() % 40));
    const double mix = static_cast<double>(eng() % 100) / 100.0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<float> img(4096);
    for (float& p : img) {
      const double r = u(eng);
      const double val = r < 0.1 ? u(eng) * 255.0 : (r < 0.1 + 0.9 * mix ? a(eng) : b(eng));
      p = static_cast<float>(std::clamp(std::round(val), 0.0, 255.0));
    }
    Histogram h{};
    for (float p : img) ++h[static_cast<std::size_t>(p)];
    if (otsu_cut(h).cut != brute_force_cut(h)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(1000 - mismatches) + "/1000 histograms match the exhaustive search"};
}

// 7 -------------------------------------------------------------------------

RunConfig desk_config() { return run_config_from_json(load_toml(S2CGAN_DESK_CONFIG)); }

Outcome self_supervision() {
  const Scenario sc = *find_scenario("blobs-10pct");
  BitemporalScene scene = generate(sc.spec);
  auto probe = std::make_shared<ReadProbe>();
  scene.x2.attach_probe(probe);
  RunConfig cfg = desk_config();
  cfg.train.epochs = 1;
  const TrainedModel m = train_from_scene(scene, cfg);
  const std::size_t during = probe->reads.load();
  (void)scene.x2.values();
  const bool armed = probe->reads.load() > during;
  return {during == 0 && armed && !m.result.epochs.empty(),
          std::to_string(during) + " reads of x2 during one training epoch (probe armed: " +
              (armed ? "yes" : "no") + ")"};
}

// 8 -------------------------------------------------------------------------

struct DeskRun {
  fs::path run_dir;
  fs::path scene_dir;
  bool ok = false;
};

Outcome end_to_end(DeskRun& keep) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = desk_config();

  const Scenario blobs = *find_scenario("blobs-10pct");
  const BitemporalScene scene = generate(blobs.spec);
  TrainRunOptions opts;
  opts.checkpoint_dir = keep.run_dir;
  TrainedModel model = train_from_scene(scene, cfg, opts);
  const Detection det = detect(scene, model, cfg);
  const BinaryMask ref = crop(*scene.reference_mask, det.change_map.mask.height, det.change_map.mask.width);
  const MetricsReport r = report(confusion(det.change_map.mask, ref));

  const Scenario null_sc = *find_scenario("null");
  const BitemporalScene quiet = generate(null_sc.spec);
  TrainedModel null_model = train_from_scene(quiet, cfg);
  const double null_fraction = detect(quiet, null_model, cfg).change_map.mask.fraction();

  write_raster(keep.scene_dir / "x1.f32", scene.x1);
  write_raster(keep.scene_dir / "x2.f32", scene.x2);
  keep.ok = true;

  const auto& e = model.result.epochs;
  const double first = e.front().held_out_l1.value_or(NAN);
  const double last = e.back().held_out_l1.value_or(NAN);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double sen = r.sen.value_or(0.0);
  const double spc = r.spc.value_or(0.0);
  const bool pass = sen >= 0.6 && spc >= 0.85 && null_fraction <= 0.02;
  std::string detail = "blobs-10pct SEN " + fmt("%.4f", sen) + " SPC " + fmt("%.4f", spc) + " OA " +
                       fmt("%.4f", r.oa.value_or(0.0)) + "; null change fraction " + fmt("%.4f", null_fraction) +
                       "; held-out L1 " + fmt("%.4f", first) + " -> " + fmt("%.4f", last) + "; D real/fake " +
                       fmt("%.3f", e.back().d_real) + "/" + fmt("%.3f", e.back().d_fake) + "; " +
                       fmt("%.0f", secs) + " s";
  return {pass, detail};
}

// 9 -------------------------------------------------------------------------

Outcome determinism(const DeskRun& desk, const fs::path& work) {
  if (!desk.ok) return {false, "no trained checkpoint available (criterion 8 did not complete)"};
  const std::string cli = S2CGAN_CLI_PATH;
  auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  const std::string base = q(cli) + " detect --threads 1 --seed 11 --x1 " + q(desk.scene_dir / "x1.f32") + " --x2 " +
                           q(desk.scene_dir / "x2.f32") + " --checkpoint " + q(desk.run_dir) + " --config " +
                           q(S2CGAN_DESK_CONFIG) + " --out ";
  const int a = testing::run(base + q(work / "det_a"));
  const int b = testing::run(base + q(work / "det_b"));
  if (a != 0 || b != 0) return {false, "detect exited with " + std::to_string(a) + "/" + std::to_string(b)};
  const std::string ma = testing::read_bytes(work / "det_a" / "change_map.u8");
  const std::string mb = testing::read_bytes(work / "det_b" / "change_map.u8");
  const std::string sa = testing::read_bytes(work / "det_a" / "change_map.u8.json");
  const std::string sb = testing::read_bytes(work / "det_b" / "change_map.u8.json");
  const bool same = !ma.empty() && ma == mb && sa == sb;
  return {same, std::to_string(ma.size()) + "-byte change maps " + (same ? "identical" : "differ")};
}

}  // namespace

int main() {
  testing::TempDir work("acceptance");
  DeskRun desk{work.path() / "run", work.path() / "scene"};
  fs::create_directories(desk.scene_dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric consistency", metric_consistency},
      {"loss oracles", loss_oracles},
      {"gradient checks", gradient_checks},
      {"shape and range invariants", shape_invariants},
      {"noise synthesis", noise_synthesis},
      {"Otsu equivalence", otsu_equivalence},
      {"self-supervision (no x2 reads)", self_supervision},
      {"end-to-end desk scale", [&] { return end_to_end(desk); }},
      {"detect determinism", [&] { return determinism(desk, work.path()); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
