#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "s2cgan/raster.hpp"

namespace s2cgan {

/// Positive class = changed.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// A measure whose denominator is zero is left empty rather than set to 0.
struct MetricsReport {
  std::optional<double> oa;
  std::optional<double> spc;
  std::optional<double> sen;
  std::optional<double> err;
  ConfusionCounts counts;
};

/// Throws SHAPE_MISMATCH on differing dims, NON_BINARY_INPUT on values outside {0, 1}.
ConfusionCounts confusion(const BinaryMask& predicted, const BinaryMask& reference);

MetricsReport report(const ConfusionCounts& counts);

/// ERR from OA.
inline double error_rate(double oa) { return 1.0 - oa; }

/// {"oa", "spc", "sen", "err", "tp", "tn", "fp", "fn"}; undefined measures are null.
nlohmann::json to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

/// Aligned plain-text table with columns OA SPC SEN ERR.
std::string format_table(const MetricsReport& r, const std::string& label = "S2-cGAN");

}  // namespace s2cgan
