#pragma once

// Layer building blocks with explicit forward/backward passes. Each layer
// caches what its backward pass needs from the most recent forward call, so
// a forward must precede the matching backward. Parameter gradients
// accumulate until zero_grad().

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "s2cgan/kernels.hpp"
#include "s2cgan/tensor.hpp"

namespace s2cgan {

template <typename T>
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;
  std::vector<T> velocity;

  Parameter() = default;
  Parameter(std::string n, std::vector<int> s);

  std::size_t size() const noexcept { return value.size(); }
  void zero_grad();
};

template <typename T>
class Conv2d {
 public:
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
         int padding);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out);

  Parameter<T>& weight() noexcept { return weight_; }
  Parameter<T>& bias() noexcept { return bias_; }
  void set_backend(KernelBackend b) noexcept { backend_ = b; }

  int in_channels() const noexcept { return in_channels_; }
  int out_channels() const noexcept { return out_channels_; }

 private:
  ConvGeometry geometry(int h, int w) const;

  int in_channels_, out_channels_, kernel_, stride_, padding_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
  KernelBackend backend_ = KernelBackend::kParallel;
};

/// Transposed convolution; weight layout [in_channels, out_channels, k, k].
template <typename T>
class ConvTranspose2d {
 public:
  ConvTranspose2d(const std::string& name, int in_channels, int out_channels, int kernel,
                  int stride, int padding);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out);

  Parameter<T>& weight() noexcept { return weight_; }
  Parameter<T>& bias() noexcept { return bias_; }
  void set_backend(KernelBackend b) noexcept { backend_ = b; }

 private:
  // Geometry of the adjoint convolution mapping this layer's output back to its input.
  ConvGeometry adjoint_geometry(int in_h, int in_w) const;

  int in_channels_, out_channels_, kernel_, stride_, padding_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
  KernelBackend backend_ = KernelBackend::kParallel;
};

/// Per-sample, per-channel feature normalization with a learned affine map.
template <typename T>
class InstanceNorm {
 public:
  InstanceNorm(const std::string& name, int channels, double eps = 1e-5);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out);

  Parameter<T>& scale() noexcept { return scale_; }
  Parameter<T>& shift() noexcept { return shift_; }

 private:
  int channels_;
  double eps_;
  Parameter<T> scale_;
  Parameter<T> shift_;
  Tensor<T> normalized_;
  std::vector<T> inv_std_;
};

template <typename T>
class LeakyReLU {
 public:
  explicit LeakyReLU(double slope) : slope_(static_cast<T>(slope)) {}
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out) const;

 private:
  T slope_;
  Tensor<T> input_;
};

template <typename T>
class Tanh {
 public:
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out) const;

 private:
  Tensor<T> output_;
};

template <typename T>
class Sigmoid {
 public:
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out) const;

 private:
  Tensor<T> output_;
};

/// Inverted dropout. The mask for sample i is drawn from an engine seeded by
/// sample_seeds[i] and `stream`, so masks are independent of batch layout.
template <typename T>
class Dropout {
 public:
  explicit Dropout(double rate, std::uint64_t stream) : rate_(rate), stream_(stream) {}

  Tensor<T> forward(const Tensor<T>& x, std::span<const std::uint64_t> sample_seeds, bool active);
  Tensor<T> backward(const Tensor<T>& grad_out) const;

  double rate() const noexcept { return rate_; }

 private:
  double rate_;
  std::uint64_t stream_;
  bool active_ = false;
  std::vector<T> mask_;
};

}  // namespace s2cgan
