#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "s2cgan/layers.hpp"
#include "s2cgan/tensor.hpp"

namespace s2cgan {

enum class NoiseMode { kDropout, kNone };

/// Realization of the generator's latent noise z.
struct GeneratorNoise {
  NoiseMode mode = NoiseMode::kDropout;
  double dropout_rate = 0.5;

  void validate() const;
};

/// U-Net: three stride-2 encoder convolutions (B -> c -> 2c -> 4c) and three
/// mirrored transposed convolutions (4c -> 2c -> c -> B) with channel-concat
/// skips. Six convolutional layers in total.
struct GeneratorSpec {
  int bands = 3;
  int base_channels = 64;
  int kernel = 4;
  double leaky_slope = 0.2;
  GeneratorNoise noise;
};

/// Pixel discriminator: two 1x1 convolutions on concat(condition, candidate).
struct DiscriminatorSpec {
  int bands = 3;
  int hidden_channels = 64;
  double leaky_slope = 0.2;
};

template <typename T>
class Generator {
 public:
  explicit Generator(const GeneratorSpec& spec);

  /// r = G(x, z). `sample_seeds` selects the dropout realization per sample
  /// (ignored when the noise mode is kNone). Throws BAD_SPATIAL_DIMS unless
  /// H and W are divisible by 8.
  Tensor<T> forward(const Tensor<T>& x, std::span<const std::uint64_t> sample_seeds);

  /// Back-propagates d loss / d output; accumulates parameter gradients and
  /// returns the gradient with respect to the input.
  Tensor<T> backward(const Tensor<T>& grad_out);

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  void zero_grad();
  void set_backend(KernelBackend backend);
  /// Disables the dropout noise without changing the architecture (z fixed to its mean).
  void set_noise_active(bool active) noexcept { noise_active_ = active; }

  const GeneratorSpec& spec() const noexcept { return spec_; }
  static constexpr int kConvLayers = 6;

 private:
  GeneratorSpec spec_;
  Conv2d<T> down1_, down2_, down3_;
  InstanceNorm<T> norm_d2_, norm_d3_;
  LeakyReLU<T> act_d1_, act_d2_, act_d3_;
  ConvTranspose2d<T> up1_, up2_, up3_;
  InstanceNorm<T> norm_u1_, norm_u2_;
  LeakyReLU<T> act_u1_, act_u2_;
  Dropout<T> drop_u1_, drop_u2_;
  Tanh<T> out_act_;
  int skip1_channels_ = 0;
  int skip2_channels_ = 0;
  bool noise_active_ = true;
};

template <typename T>
class Discriminator {
 public:
  explicit Discriminator(const DiscriminatorSpec& spec);

  /// Per-pixel scores in (0, 1), shape [N, 1, H, W].
  Tensor<T> forward(const Tensor<T>& condition, const Tensor<T>& candidate);

  /// Returns d loss / d candidate; accumulates parameter gradients.
  Tensor<T> backward(const Tensor<T>& grad_scores);

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  void zero_grad();
  void set_backend(KernelBackend backend);

  const DiscriminatorSpec& spec() const noexcept { return spec_; }

 private:
  DiscriminatorSpec spec_;
  Conv2d<T> conv1_, conv2_;
  LeakyReLU<T> act1_;
  Sigmoid<T> out_act_;
};

/// Weights ~ N(0, 0.02^2); normalization scales ~ N(1, 0.02^2); biases and
/// normalization shifts zero.
template <typename T>
void init_params(std::vector<Parameter<T>*> params, std::uint64_t seed);

template <typename T>
std::size_t parameter_count(const std::vector<Parameter<T>*>& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->size();
  return n;
}

/// Copies parameter values between networks of identical architecture.
template <typename To, typename From>
void copy_parameters(const std::vector<const Parameter<From>*>& src, const std::vector<Parameter<To>*>& dst);

}  // namespace s2cgan
