#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "s2cgan/error.hpp"
#include "s2cgan/raster.hpp"
#include "s2cgan/tensor.hpp"

namespace s2cgan {

/// Stacks same-shaped rasters into an [N, B, H, W] tensor.
inline Tensor<float> stack_rasters(std::span<const Raster* const> rasters) {
  if (rasters.empty()) return {};
  const Raster& first = *rasters.front();
  Tensor<float> t(static_cast<int>(rasters.size()), first.bands(), first.height(), first.width());
  for (std::size_t i = 0; i < rasters.size(); ++i) {
    if (!rasters[i]->same_shape(first)) {
      throw Error(ErrorCode::kShapeMismatch, "batch rasters differ in shape");
    }
    const auto src = rasters[i]->values();
    std::copy(src.begin(), src.end(), t.sample(static_cast<int>(i)).begin());
  }
  return t;
}

inline Raster raster_from_sample(const Tensor<float>& t, int i) {
  Raster r(t.h(), t.w(), t.c());
  const auto src = t.sample(i);
  std::copy(src.begin(), src.end(), r.mutable_values().begin());
  return r;
}

}  // namespace s2cgan
