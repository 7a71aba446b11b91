#pragma once

// Strided 2-D correlation primitives shared by Conv2d and ConvTranspose2d.
//
// Layouts (per sample, NCHW):
//   input        [in_channels,  in_h,  in_w]
//   weight       [out_channels, in_channels, kernel, kernel]
//   output       [out_channels, out_h, out_w]
//
// A transposed convolution is the adjoint of correlate_forward, so its
// forward pass is correlate_backward_input and its input gradient is
// correlate_forward with the roles of the two channel axes swapped.
//
// Two implementations are provided with identical contracts:
//   kernels::reference  straightforward serial loops, kept as a test oracle
//   kernels::parallel   im2col + row-blocked GEMM under OpenMP
// The parallel variant partitions work so that every output element is
// accumulated by exactly one thread in a fixed order; results therefore do
// not depend on the thread count.

#include <cstddef>
#include <span>

namespace s2cgan {

struct ConvGeometry {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int in_h = 0;
  int in_w = 0;

  int out_h() const noexcept { return (in_h + 2 * padding - kernel) / stride + 1; }
  int out_w() const noexcept { return (in_w + 2 * padding - kernel) / stride + 1; }
  std::size_t input_size() const noexcept {
    return static_cast<std::size_t>(in_channels) * in_h * in_w;
  }
  std::size_t output_size() const noexcept {
    return static_cast<std::size_t>(out_channels) * out_h() * out_w();
  }
  std::size_t weight_size() const noexcept {
    return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
  }
};

enum class KernelBackend { kParallel, kReference };

namespace kernels {

namespace reference {

// output = correlate(input, weight); overwrites output.
template <typename T>
void correlate_forward(const ConvGeometry& g, int batch, std::span<const T> input,
                       std::span<const T> weight, std::span<T> output);

// grad_input = adjoint(grad_output); overwrites grad_input.
template <typename T>
void correlate_backward_input(const ConvGeometry& g, int batch, std::span<const T> grad_output,
                              std::span<const T> weight, std::span<T> grad_input);

// grad_weight += d output / d weight contracted with grad_output.
template <typename T>
void correlate_backward_weight(const ConvGeometry& g, int batch, std::span<const T> input,
                               std::span<const T> grad_output, std::span<T> grad_weight);

}  // namespace reference

namespace parallel {

template <typename T>
void correlate_forward(const ConvGeometry& g, int batch, std::span<const T> input,
                       std::span<const T> weight, std::span<T> output);

template <typename T>
void correlate_backward_input(const ConvGeometry& g, int batch, std::span<const T> grad_output,
                              std::span<const T> weight, std::span<T> grad_input);

template <typename T>
void correlate_backward_weight(const ConvGeometry& g, int batch, std::span<const T> input,
                               std::span<const T> grad_output, std::span<T> grad_weight);

}  // namespace parallel

template <typename T>
void correlate_forward(KernelBackend backend, const ConvGeometry& g, int batch,
                       std::span<const T> input, std::span<const T> weight, std::span<T> output) {
  if (backend == KernelBackend::kReference) {
    reference::correlate_forward<T>(g, batch, input, weight, output);
  } else {
    parallel::correlate_forward<T>(g, batch, input, weight, output);
  }
}

template <typename T>
void correlate_backward_input(KernelBackend backend, const ConvGeometry& g, int batch,
                              std::span<const T> grad_output, std::span<const T> weight,
                              std::span<T> grad_input) {
  if (backend == KernelBackend::kReference) {
    reference::correlate_backward_input<T>(g, batch, grad_output, weight, grad_input);
  } else {
    parallel::correlate_backward_input<T>(g, batch, grad_output, weight, grad_input);
  }
}

template <typename T>
void correlate_backward_weight(KernelBackend backend, const ConvGeometry& g, int batch,
                               std::span<const T> input, std::span<const T> grad_output,
                               std::span<T> grad_weight) {
  if (backend == KernelBackend::kReference) {
    reference::correlate_backward_weight<T>(g, batch, input, grad_output, grad_weight);
  } else {
    parallel::correlate_backward_weight<T>(g, batch, input, grad_output, grad_weight);
  }
}

}  // namespace kernels

/// Caps OpenMP worker threads; 0 leaves the runtime default.
void set_thread_count(int threads);
int thread_count();

}  // namespace s2cgan
