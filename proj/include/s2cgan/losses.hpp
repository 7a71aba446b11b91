#pragma once

// Objectives for adversarial training. All reductions are means, so the L1
// weight is independent of patch size and batch size.
//
//   L1        mean |target - reconstruction|
//   D loss    -[mean log D(x1, x2~) + mean log(1 - D(x1, G(x1, z)))]
//   G loss    -mean log D(x1, G(x1, z)) + lambda * L1
//
// Discriminator scores are clamped to [eps, 1 - eps] before the log; the
// clamp has zero gradient outside that interval.

#include <algorithm>
#include <cmath>
#include <span>

#include "s2cgan/error.hpp"
#include "s2cgan/raster.hpp"
#include "s2cgan/score_raster.hpp"

namespace s2cgan {

inline constexpr double kLogEps = 1e-7;

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::kShapeMismatch, "loss operands differ in size");
}

template <typename T>
double clamp_score(T p) {
  return std::clamp(static_cast<double>(p), kLogEps, 1.0 - kLogEps);
}

template <typename T>
bool inside_clamp(T p) {
  const double v = static_cast<double>(p);
  return v > kLogEps && v < 1.0 - kLogEps;
}

}  // namespace detail

template <typename T>
double loss_l1(std::span<const T> target, std::span<const T> reconstruction) {
  detail::require_same_size(target.size(), reconstruction.size());
  if (target.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    sum += std::abs(static_cast<double>(target[i]) - static_cast<double>(reconstruction[i]));
  }
  return sum / static_cast<double>(target.size());
}

/// Adds weight * d L1 / d reconstruction into grad.
template <typename T>
void add_loss_l1_grad(std::span<const T> target, std::span<const T> reconstruction, double weight,
                      std::span<T> grad) {
  detail::require_same_size(target.size(), reconstruction.size());
  const double scale = weight / static_cast<double>(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const T d = reconstruction[i] - target[i];
    if (d > T{0}) grad[i] += static_cast<T>(scale);
    else if (d < T{0}) grad[i] -= static_cast<T>(scale);
  }
}

template <typename T>
double loss_cgan_d(std::span<const T> d_real, std::span<const T> d_fake) {
  double real_term = 0.0;
  for (T p : d_real) real_term += std::log(detail::clamp_score(p));
  double fake_term = 0.0;
  for (T p : d_fake) fake_term += std::log(1.0 - detail::clamp_score(p));
  return -(real_term / static_cast<double>(d_real.size()) + fake_term / static_cast<double>(d_fake.size()));
}

/// d/d d_real of -mean log d_real (overwrites grad_real).
template <typename T>
void loss_cgan_d_real_grad(std::span<const T> d_real, std::span<T> grad_real) {
  const double n = static_cast<double>(d_real.size());
  for (std::size_t i = 0; i < d_real.size(); ++i) {
    grad_real[i] = detail::inside_clamp(d_real[i]) ? static_cast<T>(-1.0 / (n * d_real[i])) : T{0};
  }
}

/// d/d d_fake of -mean log(1 - d_fake) (overwrites grad_fake).
template <typename T>
void loss_cgan_d_fake_grad(std::span<const T> d_fake, std::span<T> grad_fake) {
  const double n = static_cast<double>(d_fake.size());
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    grad_fake[i] = detail::inside_clamp(d_fake[i]) ? static_cast<T>(1.0 / (n * (1.0 - d_fake[i]))) : T{0};
  }
}

/// Non-saturating adversarial term -mean log D(fake).
template <typename T>
double loss_g_adv(std::span<const T> d_fake) {
  double sum = 0.0;
  for (T p : d_fake) sum += std::log(detail::clamp_score(p));
  return -sum / static_cast<double>(d_fake.size());
}

template <typename T>
void loss_g_adv_grad(std::span<const T> d_fake, std::span<T> grad_fake) {
  const double n = static_cast<double>(d_fake.size());
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    grad_fake[i] = detail::inside_clamp(d_fake[i]) ? static_cast<T>(-1.0 / (n * d_fake[i])) : T{0};
  }
}

template <typename T>
double loss_g(std::span<const T> d_fake, std::span<const T> target, std::span<const T> reconstruction,
              double lambda_l1) {
  return loss_g_adv(d_fake) + lambda_l1 * loss_l1(target, reconstruction);
}

// Typed conveniences over the domain types.
double loss_l1(const Raster& target, const Raster& reconstruction);
double loss_cgan_d(const ScoreRaster& d_real, const ScoreRaster& d_fake);
double loss_g(const ScoreRaster& d_fake, const Raster& target, const Raster& reconstruction,
              double lambda_l1);

}  // namespace s2cgan
