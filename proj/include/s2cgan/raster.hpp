#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace s2cgan {

/// Counts read accesses to a raster's pixel data. Attached in tests to prove
/// that a code path never touches a given image.
struct ReadProbe {
  std::atomic<std::size_t> reads{0};
};

/// Multi-band float raster stored band-sequential: [band][row][col].
class Raster {
 public:
  Raster() = default;
  Raster(int height, int width, int bands, float fill = 0.0f);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int bands() const noexcept { return bands_; }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> values() const;
  std::span<float> mutable_values() noexcept { return data_; }
  std::span<const float> band(int b) const;
  std::span<float> mutable_band(int b) noexcept;

  float at(int b, int row, int col) const { return band(b)[index(row, col)]; }
  float& at(int b, int row, int col) noexcept { return mutable_band(b)[index(row, col)]; }

  bool same_shape(const Raster& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && bands_ == other.bands_;
  }

  /// Copies of this raster share the probe.
  void attach_probe(std::shared_ptr<ReadProbe> probe) { probe_ = std::move(probe); }
  const std::shared_ptr<ReadProbe>& probe() const noexcept { return probe_; }

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * width_ + col;
  }
  void record_read() const;

  int height_ = 0;
  int width_ = 0;
  int bands_ = 0;
  std::vector<float> data_;
  std::shared_ptr<ReadProbe> probe_;
};

/// Single-band binary raster; values in {0, 1} (1 = changed).
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;

  BinaryMask() = default;
  BinaryMask(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
  std::size_t count_ones() const;
  double fraction() const;
};

struct BandRange {
  double min = 0.0;
  double max = 0.0;
};
using BandStats = std::vector<BandRange>;

nlohmann::json band_stats_to_json(const BandStats& stats);
BandStats band_stats_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Portable raster format: raw little-endian band-sequential samples plus a
// JSON sidecar at "<path>.json":
//   {"width": W, "height": H, "bands": B, "dtype": "f32" | "u8", "order": "bsq"}
// An optional "provenance" object is carried through for output artifacts.

std::filesystem::path sidecar_path(const std::filesystem::path& data_path);

Raster read_raster(const std::filesystem::path& path);
void write_raster(const std::filesystem::path& path, const Raster& raster,
                  const nlohmann::json& provenance = nullptr);

/// Reads a single-band mask. u8 data: any nonzero value is "changed".
/// f32 data must hold exactly 0 or 1, otherwise BAD_MASK.
BinaryMask read_mask(const std::filesystem::path& path);

/// Writes a mask as u8 0/255.
void write_mask(const std::filesystem::path& path, const BinaryMask& mask,
                const nlohmann::json& provenance = nullptr);

nlohmann::json read_sidecar(const std::filesystem::path& data_path);

/// 8-bit grayscale PNG.
void write_png_gray(const std::filesystem::path& path, int height, int width,
                    std::span<const std::uint8_t> pixels);

}  // namespace s2cgan
