#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace s2cgan {

/// Dense NCHW tensor. Batch-major, channel planes contiguous per sample.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, T fill = T{0})
      : shape_{n, c, h, w}, data_(static_cast<std::size_t>(n) * c * h * w, fill) {}

  int n() const noexcept { return shape_[0]; }
  int c() const noexcept { return shape_[1]; }
  int h() const noexcept { return shape_[2]; }
  int w() const noexcept { return shape_[3]; }
  const std::array<int, 4>& shape() const noexcept { return shape_; }

  std::size_t size() const noexcept { return data_.size(); }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(shape_[2]) * shape_[3]; }
  std::size_t sample_size() const noexcept { return plane_size() * shape_[1]; }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  std::span<T> sample(int i) noexcept {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(i) * sample_size(), sample_size());
  }
  std::span<const T> sample(int i) const noexcept {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(i) * sample_size(), sample_size());
  }

  std::size_t offset(int i, int ch, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(i) * shape_[1] + ch) * shape_[2] + y) * shape_[3] + x;
  }
  T& at(int i, int ch, int y, int x) noexcept { return data_[offset(i, ch, y, x)]; }
  const T& at(int i, int ch, int y, int x) const noexcept { return data_[offset(i, ch, y, x)]; }

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shape_string() const {
    return "[" + std::to_string(shape_[0]) + "," + std::to_string(shape_[1]) + "," +
           std::to_string(shape_[2]) + "," + std::to_string(shape_[3]) + "]";
  }

 private:
  std::array<int, 4> shape_{0, 0, 0, 0};
  std::vector<T> data_;
};

/// Concatenate two tensors along the channel axis (same N, H, W).
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  assert(a.n() == b.n() && a.h() == b.h() && a.w() == b.w());
  Tensor<T> out(a.n(), a.c() + b.c(), a.h(), a.w());
  for (int i = 0; i < a.n(); ++i) {
    auto dst = out.sample(i);
    auto sa = a.sample(i);
    auto sb = b.sample(i);
    std::copy(sa.begin(), sa.end(), dst.begin());
    std::copy(sb.begin(), sb.end(), dst.begin() + static_cast<std::ptrdiff_t>(sa.size()));
  }
  return out;
}

/// Inverse of concat_channels: split off the first `first_channels` planes.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& t, int first_channels) {
  assert(first_channels >= 0 && first_channels <= t.c());
  Tensor<T> a(t.n(), first_channels, t.h(), t.w());
  Tensor<T> b(t.n(), t.c() - first_channels, t.h(), t.w());
  for (int i = 0; i < t.n(); ++i) {
    auto src = t.sample(i);
    auto da = a.sample(i);
    auto db = b.sample(i);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(da.size()), da.begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(da.size()), src.end(), db.begin());
  }
  return {std::move(a), std::move(b)};
}

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  Tensor<To> out(t.n(), t.c(), t.h(), t.w());
  for (std::size_t i = 0; i < t.size(); ++i) out.data()[i] = static_cast<To>(t.data()[i]);
  return out;
}

}  // namespace s2cgan
