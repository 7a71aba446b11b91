#pragma once

#include <string_view>
#include <vector>

namespace s2cgan {

enum class ScoreKind { kReconstructionError, kRealPairScore, kGeneratedPairScore, kDifference, kFused };
enum class Polarity { kHighMeansChange, kLowMeansChange };

std::string_view to_string(ScoreKind kind);

/// Single-channel per-pixel map with its semantic kind and polarity.
struct ScoreRaster {
  int height = 0;
  int width = 0;
  std::vector<float> values;
  ScoreKind kind = ScoreKind::kFused;
  Polarity polarity = Polarity::kHighMeansChange;
  // Set when fusion hit a constant input and fell back to an all-zero map.
  bool degenerate = false;

  ScoreRaster() = default;
  ScoreRaster(int h, int w, ScoreKind k, Polarity p, float fill = 0.0f)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill), kind(k), polarity(p) {}

  float at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  float& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
  bool same_shape(const ScoreRaster& o) const noexcept { return height == o.height && width == o.width; }
};

}  // namespace s2cgan
