#include "s2cgan/layers.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "s2cgan/rng.hpp"

namespace s2cgan {

template <typename T>
Parameter<T>::Parameter(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
  const std::size_t count =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                      [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  value.assign(count, T{0});
  grad.assign(count, T{0});
  velocity.assign(count, T{0});
}

template <typename T>
void Parameter<T>::zero_grad() {
  std::fill(grad.begin(), grad.end(), T{0});
}

namespace {

template <typename T>
void add_channel_bias(Tensor<T>& t, const std::vector<T>& bias) {
  const std::size_t plane = t.plane_size();
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < t.n(); ++i) {
    for (int c = 0; c < t.c(); ++c) {
      T* p = &t.at(i, c, 0, 0);
      const T b = bias[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < plane; ++k) p[k] += b;
    }
  }
}

template <typename T>
void accumulate_channel_sums(const Tensor<T>& t, std::vector<T>& out) {
  const std::size_t plane = t.plane_size();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < t.c(); ++c) {
    T acc{0};
    for (int i = 0; i < t.n(); ++i) {
      const T* p = &t.at(i, c, 0, 0);
      for (std::size_t k = 0; k < plane; ++k) acc += p[k];
    }
    out[static_cast<std::size_t>(c)] += acc;
  }
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(const std::string& name, int in_channels, int out_channels, int kernel,
                  int stride, int padding)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      weight_(name + ".weight", {out_channels, in_channels, kernel, kernel}),
      bias_(name + ".bias", {out_channels}) {}

template <typename T>
ConvGeometry Conv2d<T>::geometry(int h, int w) const {
  return ConvGeometry{in_channels_, out_channels_, kernel_, stride_, padding_, h, w};
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) {
  input_ = x;
  const ConvGeometry g = geometry(x.h(), x.w());
  Tensor<T> y(x.n(), out_channels_, g.out_h(), g.out_w());
  kernels::correlate_forward<T>(backend_, g, x.n(), x.values(), weight_.value, y.values());
  add_channel_bias(y, bias_.value);
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_out) {
  const ConvGeometry g = geometry(input_.h(), input_.w());
  Tensor<T> gx(input_.n(), in_channels_, input_.h(), input_.w());
  kernels::correlate_backward_input<T>(backend_, g, grad_out.n(), grad_out.values(),
                                       weight_.value, gx.values());
  kernels::correlate_backward_weight<T>(backend_, g, grad_out.n(), input_.values(),
                                        grad_out.values(), weight_.grad);
  accumulate_channel_sums(grad_out, bias_.grad);
  return gx;
}

// ------------------------------------------------------- ConvTranspose2d

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(const std::string& name, int in_channels, int out_channels,
                                    int kernel, int stride, int padding)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      weight_(name + ".weight", {in_channels, out_channels, kernel, kernel}),
      bias_(name + ".bias", {out_channels}) {}

template <typename T>
ConvGeometry ConvTranspose2d<T>::adjoint_geometry(int in_h, int in_w) const {
  const int out_h = (in_h - 1) * stride_ - 2 * padding_ + kernel_;
  const int out_w = (in_w - 1) * stride_ - 2 * padding_ + kernel_;
  return ConvGeometry{out_channels_, in_channels_, kernel_, stride_, padding_, out_h, out_w};
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::forward(const Tensor<T>& x) {
  input_ = x;
  const ConvGeometry g = adjoint_geometry(x.h(), x.w());
  Tensor<T> y(x.n(), out_channels_, g.in_h, g.in_w);
  kernels::correlate_backward_input<T>(backend_, g, x.n(), x.values(), weight_.value, y.values());
  add_channel_bias(y, bias_.value);
  return y;
}

template <typename T>
Tensor<T> ConvTranspose2d<T>::backward(const Tensor<T>& grad_out) {
  const ConvGeometry g = adjoint_geometry(input_.h(), input_.w());
  Tensor<T> gx(input_.n(), in_channels_, input_.h(), input_.w());
  kernels::correlate_forward<T>(backend_, g, grad_out.n(), grad_out.values(), weight_.value,
                                gx.values());
  kernels::correlate_backward_weight<T>(backend_, g, grad_out.n(), grad_out.values(),
                                        input_.values(), weight_.grad);
  accumulate_channel_sums(grad_out, bias_.grad);
  return gx;
}

// ---------------------------------------------------------- InstanceNorm

template <typename T>
InstanceNorm<T>::InstanceNorm(const std::string& name, int channels, double eps)
    : channels_(channels),
      eps_(eps),
      scale_(name + ".scale", {channels}),
      shift_(name + ".shift", {channels}) {
  std::fill(scale_.value.begin(), scale_.value.end(), T{1});
}

template <typename T>
Tensor<T> InstanceNorm<T>::forward(const Tensor<T>& x) {
  normalized_ = Tensor<T>(x.n(), x.c(), x.h(), x.w());
  inv_std_.assign(static_cast<std::size_t>(x.n()) * x.c(), T{0});
  Tensor<T> y(x.n(), x.c(), x.h(), x.w());
  const std::size_t plane = x.plane_size();
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < x.n(); ++i) {
    for (int c = 0; c < x.c(); ++c) {
      const T* src = &x.at(i, c, 0, 0);
      double mean = 0.0;
      for (std::size_t k = 0; k < plane; ++k) mean += src[k];
      mean /= static_cast<double>(plane);
      double var = 0.0;
      for (std::size_t k = 0; k < plane; ++k) {
        const double d = src[k] - mean;
        var += d * d;
      }
      var /= static_cast<double>(plane);
      const T inv = static_cast<T>(1.0 / std::sqrt(var + eps_));
      inv_std_[static_cast<std::size_t>(i) * x.c() + c] = inv;
      T* xh = &normalized_.at(i, c, 0, 0);
      T* dst = &y.at(i, c, 0, 0);
      const T g = scale_.value[static_cast<std::size_t>(c)];
      const T b = shift_.value[static_cast<std::size_t>(c)];
      const T m = static_cast<T>(mean);
      for (std::size_t k = 0; k < plane; ++k) {
        xh[k] = (src[k] - m) * inv;
        dst[k] = g * xh[k] + b;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> InstanceNorm<T>::backward(const Tensor<T>& grad_out) {
  const int n = grad_out.n();
  const int channels = grad_out.c();
  const std::size_t plane = grad_out.plane_size();
  Tensor<T> gx(n, channels, grad_out.h(), grad_out.w());
  // Per-(sample, channel) sums; scale/shift gradients are reduced per channel afterwards.
  std::vector<double> sum_g(static_cast<std::size_t>(n) * channels);
  std::vector<double> sum_gx(static_cast<std::size_t>(n) * channels);
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      const T* g = &grad_out.at(i, c, 0, 0);
      const T* xh = &normalized_.at(i, c, 0, 0);
      double sg = 0.0;
      double sgx = 0.0;
      for (std::size_t k = 0; k < plane; ++k) {
        sg += g[k];
        sgx += static_cast<double>(g[k]) * xh[k];
      }
      const std::size_t idx = static_cast<std::size_t>(i) * channels + c;
      sum_g[idx] = sg;
      sum_gx[idx] = sgx;
      const double coef = static_cast<double>(scale_.value[static_cast<std::size_t>(c)]) *
                          inv_std_[idx] / static_cast<double>(plane);
      T* dst = &gx.at(i, c, 0, 0);
      for (std::size_t k = 0; k < plane; ++k) {
        dst[k] = static_cast<T>(coef * (static_cast<double>(plane) * g[k] - sg - xh[k] * sgx));
      }
    }
  }
  for (int c = 0; c < channels; ++c) {
    double sg = 0.0;
    double sgx = 0.0;
    for (int i = 0; i < n; ++i) {
      sg += sum_g[static_cast<std::size_t>(i) * channels + c];
      sgx += sum_gx[static_cast<std::size_t>(i) * channels + c];
    }
    shift_.grad[static_cast<std::size_t>(c)] += static_cast<T>(sg);
    scale_.grad[static_cast<std::size_t>(c)] += static_cast<T>(sgx);
  }
  return gx;
}

// ----------------------------------------------------------- activations

template <typename T>
Tensor<T> LeakyReLU<T>::forward(const Tensor<T>& x) {
  input_ = x;
  Tensor<T> y = x;
  T* p = y.data();
  const std::size_t count = y.size();
#pragma omp parallel for simd schedule(static)
  for (std::size_t k = 0; k < count; ++k) p[k] = p[k] > T{0} ? p[k] : slope_ * p[k];
  return y;
}

template <typename T>
Tensor<T> LeakyReLU<T>::backward(const Tensor<T>& grad_out) const {
  Tensor<T> gx = grad_out;
  T* g = gx.data();
  const T* x = input_.data();
  const std::size_t count = gx.size();
#pragma omp parallel for simd schedule(static)
  for (std::size_t k = 0; k < count; ++k) g[k] = x[k] > T{0} ? g[k] : slope_ * g[k];
  return gx;
}

template <typename T>
Tensor<T> Tanh<T>::forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  T* p = y.data();
  const std::size_t count = y.size();
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < count; ++k) p[k] = std::tanh(p[k]);
  output_ = y;
  return y;
}

template <typename T>
Tensor<T> Tanh<T>::backward(const Tensor<T>& grad_out) const {
  Tensor<T> gx = grad_out;
  T* g = gx.data();
  const T* y = output_.data();
  const std::size_t count = gx.size();
#pragma omp parallel for simd schedule(static)
  for (std::size_t k = 0; k < count; ++k) g[k] *= T{1} - y[k] * y[k];
  return gx;
}

template <typename T>
Tensor<T> Sigmoid<T>::forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  T* p = y.data();
  const std::size_t count = y.size();
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < count; ++k) p[k] = T{1} / (T{1} + std::exp(-p[k]));
  output_ = y;
  return y;
}

template <typename T>
Tensor<T> Sigmoid<T>::backward(const Tensor<T>& grad_out) const {
  Tensor<T> gx = grad_out;
  T* g = gx.data();
  const T* y = output_.data();
  const std::size_t count = gx.size();
#pragma omp parallel for simd schedule(static)
  for (std::size_t k = 0; k < count; ++k) g[k] *= y[k] * (T{1} - y[k]);
  return gx;
}

// --------------------------------------------------------------- Dropout

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, std::span<const std::uint64_t> sample_seeds,
                              bool active) {
  active_ = active && rate_ > 0.0;
  if (!active_) {
    mask_.clear();
    return x;
  }
  mask_.assign(x.size(), T{0});
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
  const std::size_t per_sample = x.sample_size();
  for (int i = 0; i < x.n(); ++i) {
    Engine engine = make_engine(sample_seeds[static_cast<std::size_t>(i)], {stream_});
    std::bernoulli_distribution keep(1.0 - rate_);
    T* m = mask_.data() + static_cast<std::size_t>(i) * per_sample;
    for (std::size_t k = 0; k < per_sample; ++k) m[k] = keep(engine) ? keep_scale : T{0};
  }
  Tensor<T> y = x;
  T* p = y.data();
  for (std::size_t k = 0; k < y.size(); ++k) p[k] *= mask_[k];
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_out) const {
  if (!active_) return grad_out;
  Tensor<T> gx = grad_out;
  T* g = gx.data();
  for (std::size_t k = 0; k < gx.size(); ++k) g[k] *= mask_[k];
  return gx;
}

#define S2CGAN_INSTANTIATE(T)         \
  template struct Parameter<T>;       \
  template class Conv2d<T>;           \
  template class ConvTranspose2d<T>;  \
  template class InstanceNorm<T>;     \
  template class LeakyReLU<T>;        \
  template class Tanh<T>;             \
  template class Sigmoid<T>;          \
  template class Dropout<T>;

S2CGAN_INSTANTIATE(float)
S2CGAN_INSTANTIATE(double)
#undef S2CGAN_INSTANTIATE

}  // namespace s2cgan
