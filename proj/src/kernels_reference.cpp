#include <algorithm>
#include <cassert>

#include "s2cgan/kernels.hpp"

namespace s2cgan::kernels::reference {

template <typename T>
void correlate_forward(const ConvGeometry& g, int batch, std::span<const T> input,
                       std::span<const T> weight, std::span<T> output) {
  const int oh = g.out_h();
  const int ow = g.out_w();
  const int k = g.kernel;
  assert(input.size() == g.input_size() * batch);
  assert(output.size() == g.output_size() * batch);
  for (int n = 0; n < batch; ++n) {
    const T* in = input.data() + n * g.input_size();
    T* out = output.data() + n * g.output_size();
    for (int co = 0; co < g.out_channels; ++co) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          T acc{0};
          for (int ci = 0; ci < g.in_channels; ++ci) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * g.stride - g.padding + ky;
              if (iy < 0 || iy >= g.in_h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * g.stride - g.padding + kx;
                if (ix < 0 || ix >= g.in_w) continue;
                acc += weight[((co * g.in_channels + ci) * k + ky) * k + kx] *
                       in[(ci * g.in_h + iy) * g.in_w + ix];
              }
            }
          }
          out[(co * oh + oy) * ow + ox] = acc;
        }
      }
    }
  }
}

template <typename T>
void correlate_backward_input(const ConvGeometry& g, int batch, std::span<const T> grad_output,
                              std::span<const T> weight, std::span<T> grad_input) {
  const int oh = g.out_h();
  const int ow = g.out_w();
  const int k = g.kernel;
  std::fill(grad_input.begin(), grad_input.end(), T{0});
  for (int n = 0; n < batch; ++n) {
    const T* go = grad_output.data() + n * g.output_size();
    T* gi = grad_input.data() + n * g.input_size();
    for (int co = 0; co < g.out_channels; ++co) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const T v = go[(co * oh + oy) * ow + ox];
          for (int ci = 0; ci < g.in_channels; ++ci) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * g.stride - g.padding + ky;
              if (iy < 0 || iy >= g.in_h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * g.stride - g.padding + kx;
                if (ix < 0 || ix >= g.in_w) continue;
                gi[(ci * g.in_h + iy) * g.in_w + ix] +=
                    weight[((co * g.in_channels + ci) * k + ky) * k + kx] * v;
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void correlate_backward_weight(const ConvGeometry& g, int batch, std::span<const T> input,
                               std::span<const T> grad_output, std::span<T> grad_weight) {
  const int oh = g.out_h();
  const int ow = g.out_w();
  const int k = g.kernel;
  for (int n = 0; n < batch; ++n) {
    const T* in = input.data() + n * g.input_size();
    const T* go = grad_output.data() + n * g.output_size();
    for (int co = 0; co < g.out_channels; ++co) {
      for (int ci = 0; ci < g.in_channels; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            T acc{0};
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * g.stride - g.padding + ky;
              if (iy < 0 || iy >= g.in_h) continue;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * g.stride - g.padding + kx;
                if (ix < 0 || ix >= g.in_w) continue;
                acc += go[(co * oh + oy) * ow + ox] * in[(ci * g.in_h + iy) * g.in_w + ix];
              }
            }
            grad_weight[((co * g.in_channels + ci) * k + ky) * k + kx] += acc;
          }
        }
      }
    }
  }
}

#define S2CGAN_INSTANTIATE(T)                                                              \
  template void correlate_forward<T>(const ConvGeometry&, int, std::span<const T>,         \
                                     std::span<const T>, std::span<T>);                    \
  template void correlate_backward_input<T>(const ConvGeometry&, int, std::span<const T>,  \
                                            std::span<const T>, std::span<T>);             \
  template void correlate_backward_weight<T>(const ConvGeometry&, int, std::span<const T>, \
                                             std::span<const T>, std::span<T>);

S2CGAN_INSTANTIATE(float)
S2CGAN_INSTANTIATE(double)
#undef S2CGAN_INSTANTIATE

}  // namespace s2cgan::kernels::reference
